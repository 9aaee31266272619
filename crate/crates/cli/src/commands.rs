//! One function per subcommand. Each writes its files into the output
//! directory and returns the summary JSON it also wrote.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sharpfront::diagnostics::{
    build_envelopes, check_comparison, convergence_report, default_interval, eval_envelopes, lyapunov_series,
    stability_probe, track_shift, EnvelopeParams, StabilityProbe, PROBE_EPSILONS,
};
use sharpfront::io::{self, Table};
use sharpfront::pde::{simulate, RunPlan, State, Trajectory};
use sharpfront::profile::reconstruct_profile;
use sharpfront::reaction::check_hypotheses;
use sharpfront::wave::solve_speed;
use sharpfront::{Endpoint, Error, ReactionKind, ReactionSpec, SpeedResult, Terminal, TravellingWave};

use crate::config::{Format, InitialSource, RunConfig, SweepParameter, TrajectoryFormat};

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const IO: u8 = 1;
    pub const HYPOTHESIS: u8 = 2;
    pub const NON_CONVERGENCE: u8 = 3;
    pub const CONFIG: u8 = 4;
}

/// A failed command: message and exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self { code: exit::CONFIG, message: message.into() }
    }
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NoPositiveSpeed { .. } | Error::H4NotSatisfied { .. } => exit::HYPOTHESIS,
        Error::QuadratureNonConvergence { .. }
        | Error::UnresolvedTangency { .. }
        | Error::BracketFailure(_)
        | Error::CorruptY { .. }
        | Error::TridiagonalFailure { .. }
        | Error::NonFinite { .. }
        | Error::FrontNotInDomain { .. }
        | Error::InsufficientSampling(_) => exit::NON_CONVERGENCE,
        Error::InvalidReaction(_)
        | Error::InvalidEta { .. }
        | Error::Config(_)
        | Error::EmptyQ0Interval { .. }
        | Error::PlateauViolation { .. }
        | Error::Parse(_) => exit::CONFIG,
        Error::Io(_) => exit::IO,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self { code: exit_code(&e), message: e.to_string() }
    }
}

/// A finished command: the summary JSON it wrote and its exit code, which
/// is non-zero when the run completed but found a problem.
#[derive(Debug)]
pub struct Done {
    pub summary: String,
    pub code: u8,
    pub note: Option<String>,
}

impl Done {
    fn ok(summary: String) -> Self {
        Self { summary, code: exit::OK, note: None }
    }
}

pub type Outcome = Result<Done, Failure>;

/// Output directory and table format.
pub struct Sink {
    dir: PathBuf,
    format: Format,
}

impl Sink {
    pub fn new(dir: PathBuf, format: Format) -> Result<Self, Failure> {
        fs::create_dir_all(&dir).map_err(Error::from)?;
        Ok(Self { dir, format })
    }

    fn table(&self, stem: &str, table: &Table) -> Result<(), Failure> {
        let (name, text) = match self.format {
            Format::Csv => (format!("{stem}.csv"), table.to_csv()),
            Format::Json => (format!("{stem}.json"), table.to_json()?),
        };
        io::atomic_write(&self.dir.join(name), text.as_bytes())?;
        Ok(())
    }

    fn bytes(&self, name: &str, bytes: &[u8]) -> Result<(), Failure> {
        io::atomic_write(&self.dir.join(name), bytes)?;
        Ok(())
    }

    fn summary<T: Serialize>(&self, kind: &str, payload: &T) -> Result<String, Failure> {
        let text = io::summary_json(kind, payload)?;
        self.bytes(&format!("{kind}.json"), text.as_bytes())?;
        Ok(text)
    }
}

#[derive(Serialize)]
struct ReactionInfo {
    kind: ReactionKind,
    s0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha1: Option<f64>,
    f1: f64,
}

impl ReactionInfo {
    fn of(spec: &ReactionSpec) -> Result<Self, Failure> {
        let holder = spec.kind() == ReactionKind::HolderBistable;
        Ok(Self {
            kind: spec.kind(),
            s0: spec.s0(),
            alpha0: holder.then(|| spec.alpha0()),
            alpha1: holder.then(|| spec.alpha1()),
            f1: spec.potential(1.0)?,
        })
    }
}

fn speed_of(cfg: &RunConfig, spec: &ReactionSpec) -> Result<SpeedResult, Error> {
    solve_speed(spec, (0.0, 1.0), cfg.wave.tol, &cfg.wave.step)
}

fn wave_of(cfg: &RunConfig) -> Result<TravellingWave, Failure> {
    let spec = &cfg.reaction;
    let speed = speed_of(cfg, spec)?;
    let profile = reconstruct_profile(spec, &speed, &cfg.wave.profile)?;
    Ok(TravellingWave { spec: spec.clone(), speed, profile })
}

pub fn hypotheses(cfg: &RunConfig, sink: &Sink) -> Outcome {
    let report = check_hypotheses(&cfg.reaction, cfg.diagnostics.hypothesis_grid, Some(cfg.diagnostics.eta))?;
    let summary = sink.summary("hypotheses", &report)?;
    if report.is_ok() {
        return Ok(Done::ok(summary));
    }
    let mut names: Vec<&str> = report.violations.iter().map(|v| v.hypothesis.as_str()).collect();
    let count = names.len();
    names.dedup();
    Ok(Done {
        summary,
        code: exit::HYPOTHESIS,
        note: Some(format!("{count} hypothesis violation(s): {}", names.join(", "))),
    })
}

#[derive(Serialize)]
struct SpeedSummary {
    reaction: ReactionInfo,
    c_star: f64,
    identity_residual: f64,
    iterations: usize,
    start_coeff: f64,
    terminal: Terminal,
    y_points: usize,
}

pub fn speed(cfg: &RunConfig, sink: &Sink) -> Outcome {
    let result = speed_of(cfg, &cfg.reaction)?;
    sink.table("y", &io::y_table(&result.y))?;
    sink.summary(
        "speed",
        &SpeedSummary {
            reaction: ReactionInfo::of(&cfg.reaction)?,
            c_star: result.c_star,
            identity_residual: result.identity_residual,
            iterations: result.bisection_iterations,
            start_coeff: result.y.start_coeff,
            terminal: result.y.terminal,
            y_points: result.y.r_grid.len(),
        },
    )
    .map(Done::ok)
}

#[derive(Serialize)]
struct ProfileSummary {
    reaction: ReactionInfo,
    c_star: f64,
    s0: f64,
    z0: Endpoint,
    z1: Endpoint,
    width: Endpoint,
    nodes: usize,
}

pub fn profile(cfg: &RunConfig, sink: &Sink) -> Outcome {
    let wave = wave_of(cfg)?;
    let p = &wave.profile;
    sink.table("profile", &io::profile_table(p))?;
    sink.summary(
        "profile",
        &ProfileSummary {
            reaction: ReactionInfo::of(&cfg.reaction)?,
            c_star: p.c_star,
            s0: p.s0,
            z0: p.z0,
            z1: p.z1,
            width: p.front_width(),
            nodes: p.z_nodes.len(),
        },
    )
    .map(Done::ok)
}

fn initial_vector(cfg: &RunConfig, wave: &TravellingWave) -> Result<Vec<f64>, Failure> {
    let data = match &cfg.initial {
        InitialSource::Data(d) => d.clone(),
        InitialSource::File(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::config(format!("cannot read initial data {}: {e}", path.display())))?;
            io::initial_from_csv(&text)?
        }
    };
    Ok(data.resolve(&cfg.domain, Some(&wave.profile))?)
}

#[derive(Serialize)]
struct EnvelopeInfo {
    params: Option<EnvelopeParams>,
    /// Why the envelopes could not be built for these data.
    unavailable: Option<String>,
    max_violation: Option<f64>,
}

fn envelopes_for(cfg: &RunConfig, wave: &TravellingWave, traj: &Trajectory) -> (Option<EnvelopeParams>, EnvelopeInfo) {
    let v0 = &traj.states[0].v;
    match build_envelopes(wave, &traj.domain, v0, cfg.diagnostics.eta) {
        Ok(params) => {
            let violation = check_comparison(traj, &params, &wave.profile);
            (Some(params), EnvelopeInfo { params: Some(params), unavailable: None, max_violation: Some(violation) })
        }
        Err(e) => (None, EnvelopeInfo { params: None, unavailable: Some(e.to_string()), max_violation: None }),
    }
}

fn envelope_table(traj: &Trajectory, params: &EnvelopeParams, wave: &TravellingWave) -> Table {
    let d = &traj.domain;
    let rows = traj.states.iter().map(|s| {
        let (q1, q2) = params.q(s.t);
        let (xi1, xi2) = params.xi(s.t);
        let violation = (0..s.v.len())
            .map(|i| {
                let (v1, v2) = eval_envelopes(params, &wave.profile, d.z(i), s.t);
                (v1 - s.v[i]).max(s.v[i] - v2).max(0.0)
            })
            .fold(0.0, f64::max);
        [s.t, q1, q2, xi1, xi2, violation]
    });
    Table::new(&["t", "q1", "q2", "xi1", "xi2", "violation"], rows)
}

#[derive(Serialize)]
struct LyapunovInfo {
    interval: (f64, f64),
    e_initial: f64,
    e_final: f64,
    max_increase: f64,
    non_increasing: bool,
    max_dissipation: f64,
    max_residual: f64,
}

/// Relative slack on energy increases.
const ENERGY_SLACK: f64 = 1e-6;

fn lyapunov_for(
    cfg: &RunConfig,
    wave: &TravellingWave,
    traj: &Trajectory,
    params: Option<&EnvelopeParams>,
    sink: &Sink,
) -> Result<Option<LyapunovInfo>, Failure> {
    if traj.states.len() < 3 {
        return Ok(None);
    }
    let interval = cfg.diagnostics.interval.unwrap_or_else(|| default_interval(&wave.profile, params, &traj.domain));
    let series = lyapunov_series(&wave.spec, traj, interval)?;
    sink.table("lyapunov", &io::lyapunov_table(&series))?;
    Ok(Some(LyapunovInfo {
        interval,
        e_initial: series.samples[0].e,
        e_final: series.samples.last().unwrap().e,
        max_increase: series.max_increase,
        non_increasing: series.is_non_increasing(ENERGY_SLACK),
        max_dissipation: series.max_dissipation,
        max_residual: series.max_residual,
    }))
}

#[derive(Serialize)]
struct ConvergenceInfo {
    zeta_inf: f64,
    final_sup_dist: f64,
    zeta_spread: f64,
    monotone_tail: bool,
    lyapunov_ok: Option<bool>,
    stability_constant_estimate: Option<f64>,
}

#[derive(Serialize)]
struct SimulateSummary {
    reaction: ReactionInfo,
    c_star: f64,
    scheme: &'static str,
    dt: f64,
    theta: f64,
    z_min: f64,
    z_max: f64,
    n_cells: usize,
    t_end: f64,
    snapshots: usize,
    max_clamp: f64,
    envelopes: EnvelopeInfo,
    lyapunov: Option<LyapunovInfo>,
    convergence: Option<ConvergenceInfo>,
    stability_probe: Option<StabilityProbe>,
}

fn write_trajectory(cfg: &RunConfig, traj: &Trajectory, sink: &Sink) -> Result<(), Failure> {
    match cfg.output.trajectory {
        TrajectoryFormat::Binary => sink.bytes("trajectory.bin", &io::trajectory_bytes(&traj.domain, &traj.states)),
        TrajectoryFormat::Csv => sink.bytes("trajectory.csv", io::trajectory_table(traj).to_csv().as_bytes()),
        TrajectoryFormat::None => Ok(()),
    }
}

pub fn simulate_cmd(cfg: &RunConfig, sink: &Sink) -> Outcome {
    let wave = wave_of(cfg)?;
    let v0 = initial_vector(cfg, &wave)?;
    let traj = simulate(&wave.spec, wave.c(), &cfg.domain, v0, &cfg.scheme, cfg.plan)?;
    write_trajectory(cfg, &traj, sink)?;

    let (params, envelopes) = envelopes_for(cfg, &wave, &traj);
    let lyapunov = lyapunov_for(cfg, &wave, &traj, params.as_ref(), sink)?;
    let probe = if cfg.diagnostics.stability_probe {
        let plan = RunPlan { t_end: cfg.diagnostics.probe_t_end, snapshot_every: cfg.plan.snapshot_every };
        Some(stability_probe(&wave, &cfg.domain, &cfg.scheme, plan, &PROBE_EPSILONS, cfg.scheme.execution)?)
    } else {
        None
    };
    let convergence = if traj.states.len() >= sharpfront::diagnostics::MIN_REPORT_SAMPLES {
        let report = convergence_report(&traj, &wave.profile, None)?;
        sink.table("shift", &io::shift_table(&report.shift))?;
        Some(ConvergenceInfo {
            zeta_inf: report.zeta_inf,
            final_sup_dist: report.final_sup_dist,
            zeta_spread: report.zeta_spread,
            monotone_tail: report.monotone_tail,
            lyapunov_ok: lyapunov.as_ref().map(|l| l.non_increasing),
            stability_constant_estimate: probe.as_ref().map(|p| p.c_prime),
        })
    } else {
        None
    };
    sink.summary(
        "simulate",
        &SimulateSummary {
            reaction: ReactionInfo::of(&cfg.reaction)?,
            c_star: wave.c(),
            scheme: cfg.scheme.scheme.name(),
            dt: cfg.scheme.dt,
            theta: cfg.scheme.theta,
            z_min: cfg.domain.z_min,
            z_max: cfg.domain.z_max,
            n_cells: cfg.domain.n_cells,
            t_end: cfg.plan.t_end,
            snapshots: traj.states.len(),
            max_clamp: traj.max_clamp,
            envelopes,
            lyapunov,
            convergence,
            stability_probe: probe,
        },
    )
    .map(Done::ok)
}

/// Reads a trajectory written by `simulate`, binary unless the file name
/// ends in `.csv`.
pub fn read_trajectory(path: &Path) -> Result<(sharpfront::pde::Domain, Vec<State>), Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::config(format!("cannot read trajectory {}: {e}", path.display())))?;
    let parsed = if path.extension().is_some_and(|e| e == "csv") {
        let text = String::from_utf8(bytes).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
        io::read_trajectory_table(&Table::from_csv(&text)?)
    } else {
        io::read_trajectory_bytes(&bytes)
    };
    Ok(parsed?)
}

#[derive(Serialize)]
struct DiagnoseSummary {
    reaction: ReactionInfo,
    c_star: f64,
    snapshots: usize,
    t_final: f64,
    envelopes: EnvelopeInfo,
    lyapunov: Option<LyapunovInfo>,
    zeta_final: f64,
    sup_dist_final: f64,
}

pub fn diagnose(cfg: &RunConfig, trajectory: &Path, sink: &Sink) -> Outcome {
    let wave = wave_of(cfg)?;
    let (domain, states) = read_trajectory(trajectory)?;
    if states.is_empty() {
        return Err(Failure::config(format!("{} holds no snapshots", trajectory.display())));
    }
    let traj = Trajectory { domain, c: wave.c(), states, max_clamp: 0.0 };
    let (params, envelopes) = envelopes_for(cfg, &wave, &traj);
    if let Some(p) = &params {
        sink.table("envelopes", &envelope_table(&traj, p, &wave))?;
    }
    let lyapunov = lyapunov_for(cfg, &wave, &traj, params.as_ref(), sink)?;
    let track = track_shift(&traj, &wave.profile)?;
    sink.table("shift", &io::shift_table(&track))?;
    let last = track.last().expect("at least one snapshot");
    sink.summary(
        "diagnose",
        &DiagnoseSummary {
            reaction: ReactionInfo::of(&cfg.reaction)?,
            c_star: wave.c(),
            snapshots: traj.states.len(),
            t_final: last.t,
            envelopes,
            lyapunov,
            zeta_final: last.zeta,
            sup_dist_final: last.sup_dist,
        },
    )
    .map(Done::ok)
}

#[derive(Serialize)]
struct SweepFailure {
    value: f64,
    error: String,
}

#[derive(Serialize)]
struct SweepSummary {
    parameter: &'static str,
    reaction: ReactionInfo,
    points: usize,
    failures: Vec<SweepFailure>,
}

pub fn sweep(cfg: &RunConfig, sink: &Sink) -> Outcome {
    let Some(sweep) = cfg.sweep else {
        return Err(Failure::config("the sweep subcommand needs a [sweep] section"));
    };
    let base = &cfg.reaction;
    let values = sweep.values();
    let results = cfg.scheme.execution.map(&values, |&x| {
        let spec = match (sweep.parameter, base.kind()) {
            (SweepParameter::S0, ReactionKind::Cubic) => ReactionSpec::cubic(x),
            (SweepParameter::S0, _) => ReactionSpec::holder(x, base.alpha0(), base.alpha1()),
            (SweepParameter::Alpha, _) => ReactionSpec::holder(base.s0(), x, x),
        }?;
        speed_of(cfg, &spec)
    });
    let mut rows = Vec::with_capacity(values.len());
    let mut failures = Vec::new();
    let mut code = exit::OK;
    for (&x, r) in values.iter().zip(results) {
        match r {
            Ok(s) => rows.push([x, s.c_star, s.identity_residual, s.bisection_iterations as f64]),
            Err(e) => {
                if code == exit::OK {
                    code = exit_code(&e);
                }
                rows.push([x, f64::NAN, f64::NAN, f64::NAN]);
                failures.push(SweepFailure { value: x, error: e.to_string() });
            }
        }
    }
    let name = match sweep.parameter {
        SweepParameter::S0 => "s0",
        SweepParameter::Alpha => "alpha",
    };
    sink.table("sweep", &Table::new(&[name, "c_star", "identity_residual", "iterations"], rows))?;
    let failed = failures.len();
    let summary = sink.summary(
        "sweep",
        &SweepSummary { parameter: name, reaction: ReactionInfo::of(base)?, points: values.len(), failures },
    )?;
    let note = (failed > 0).then(|| format!("{failed} of {} sweep points failed", values.len()));
    Ok(Done { summary, code, note })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_classes_map_to_exit_codes() {
        assert_eq!(exit_code(&Error::NoPositiveSpeed { f1: 0.0 }), exit::HYPOTHESIS);
        assert_eq!(exit_code(&Error::FrontNotInDomain { level: 0.75 }), exit::NON_CONVERGENCE);
        assert_eq!(exit_code(&Error::BracketFailure("x".into())), exit::NON_CONVERGENCE);
        assert_eq!(exit_code(&Error::Config("x".into())), exit::CONFIG);
        assert_eq!(exit_code(&Error::InvalidEta { eta: 1.0, bound: 0.1 }), exit::CONFIG);
    }
}
