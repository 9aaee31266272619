//! Time stepping of `v_t = v_zz + c v_z + f(v)` on a truncated interval.
//! Boundary nodes keep their initial values, which [`InitialData::resolve`]
//! pins to 0 on the left and 1 on the right.
//!
//! Two schemes share one driver:
//!
//! * [`Scheme::ImexFd`]: theta-weighted finite differences for the linear
//!   part, explicit reaction, one tridiagonal factorisation per run.
//! * [`Scheme::SplittingGreen`]: Strang splitting where the linear part is
//!   the exact drift-shifted heat kernel applied by convolution.
//!
//! Both use an equilibrium-protected Euler map for the reaction, so a value
//! never jumps across 0, `s0` or 1 within one substep.

pub mod imex;
pub mod initial;
pub mod splitting;
pub mod tridiag;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::reaction::{one_sided_lipschitz, ReactionSpec};

pub use imex::ImexStepper;
pub use initial::{check_h5, plateaus, InitialData, Plateaus};
pub use splitting::SplittingStepper;

/// Uniform grid `z_i = z_min + i dz`, `i = 0..=n_cells`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub z_min: f64,
    pub z_max: f64,
    pub n_cells: usize,
}

impl Domain {
    pub fn new(z_min: f64, z_max: f64, n_cells: usize) -> Result<Self> {
        if !(z_min.is_finite() && z_max.is_finite() && z_min < z_max) {
            return Err(Error::Config(format!("domain needs z_min < z_max, got [{z_min}, {z_max}]")));
        }
        if n_cells < 4 {
            return Err(Error::Config(format!("domain needs at least 4 cells, got {n_cells}")));
        }
        Ok(Self { z_min, z_max, n_cells })
    }

    pub fn dz(&self) -> f64 {
        (self.z_max - self.z_min) / self.n_cells as f64
    }

    pub fn z(&self, i: usize) -> f64 {
        self.z_min + i as f64 * self.dz()
    }

    /// Number of nodes, `n_cells + 1`.
    pub fn len(&self) -> usize {
        self.n_cells + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_cells).map(move |i| self.z(i))
    }

    /// Index of the node closest to `z`, clipped to the grid.
    pub fn nearest(&self, z: f64) -> usize {
        let k = ((z - self.z_min) / self.dz()).round();
        k.clamp(0.0, self.n_cells as f64) as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub t: f64,
    pub v: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    ImexFd,
    SplittingGreen,
}

impl Scheme {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "imex_fd" => Some(Scheme::ImexFd),
            "splitting_green" => Some(Scheme::SplittingGreen),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::ImexFd => "imex_fd",
            Scheme::SplittingGreen => "splitting_green",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeCtrl {
    pub scheme: Scheme,
    pub dt: f64,
    /// Implicit weight of the finite-difference scheme; 1/2 is Crank–Nicolson.
    pub theta: f64,
    pub kernel_cutoff_sigmas: f64,
    /// Leading steps replaced by two backward-Euler half steps each, which
    /// damps the grid-scale modes Crank–Nicolson leaves undamped.
    pub rannacher_steps: usize,
    pub execution: Execution,
}

impl Default for SchemeCtrl {
    fn default() -> Self {
        Self {
            scheme: Scheme::ImexFd,
            dt: 0.002,
            theta: 0.5,
            kernel_cutoff_sigmas: 8.0,
            rannacher_steps: 2,
            execution: Execution::default(),
        }
    }
}

/// Grid used when sampling the one-sided Lipschitz constant for the guard.
const GUARD_GRID: usize = 400;

impl SchemeCtrl {
    /// The explicit-reaction bound `dt * max_slope`, where `max_slope`
    /// combines the one-sided constant and the sampled `|f'|`.
    pub fn reaction_courant(&self, spec: &ReactionSpec) -> f64 {
        let l = one_sided_lipschitz(spec, GUARD_GRID, self.execution);
        self.dt * spec.slope_bound(l)
    }

    /// Checks every stability guard and returns all failures at once.
    pub fn validate(&self, spec: &ReactionSpec, c: f64, domain: &Domain) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            problems.push(format!("dt must be positive, got {}", self.dt));
        } else {
            let courant = self.reaction_courant(spec);
            if courant > 0.5 {
                problems.push(format!("stability guard dt * max_slope <= 0.5 violated: dt * max_slope = {courant:.6}"));
            }
        }
        if !(0.5..=1.0).contains(&self.theta) {
            problems.push(format!("theta must lie in [0.5, 1], got {}", self.theta));
        }
        if !(self.kernel_cutoff_sigmas > 0.0) {
            problems.push(format!("kernel_cutoff_sigmas must be positive, got {}", self.kernel_cutoff_sigmas));
        }
        let peclet = c.abs() * domain.dz() / 2.0;
        if peclet >= 1.0 {
            problems.push(format!("cell Peclet guard |c| * dz / 2 < 1 violated: {peclet:.6}"));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }
}

/// `v + h f(v)`, cut off so that it does not cross the equilibrium that
/// bounds the interval `v` lies in.
pub fn protected_euler(spec: &ReactionSpec, v: f64, h: f64) -> f64 {
    let s0 = spec.s0();
    let w = v + h * spec.f(v);
    if v < 0.0 {
        w.min(0.0)
    } else if v <= s0 {
        if v == 0.0 || v == s0 {
            v
        } else {
            w.clamp(0.0, s0)
        }
    } else if v <= 1.0 {
        if v == 1.0 {
            v
        } else {
            w.clamp(s0, 1.0)
        }
    } else {
        w.max(1.0)
    }
}

/// A prepared scheme, ready to advance a vector on a fixed grid.
#[derive(Clone, Debug)]
pub enum Stepper {
    Imex(ImexStepper),
    Splitting(SplittingStepper),
}

impl Stepper {
    pub fn new(spec: &ReactionSpec, c: f64, domain: &Domain, ctrl: &SchemeCtrl) -> Result<Self> {
        ctrl.validate(spec, c, domain)?;
        Ok(match ctrl.scheme {
            Scheme::ImexFd => Stepper::Imex(ImexStepper::new(spec, c, domain, ctrl)?),
            Scheme::SplittingGreen => Stepper::Splitting(SplittingStepper::new(spec, c, domain, ctrl)?),
        })
    }

    /// Advances one step, clamps to `[0, 1]` and returns the largest amount
    /// removed by the clamp.
    pub fn step(&mut self, v: &mut [f64]) -> f64 {
        match self {
            Stepper::Imex(s) => s.step(v),
            Stepper::Splitting(s) => s.step(v),
        }
        clamp_unit(v)
    }
}

fn clamp_unit(v: &mut [f64]) -> f64 {
    let mut worst = 0.0_f64;
    for x in v.iter_mut() {
        let c = x.clamp(0.0, 1.0);
        worst = worst.max((c - *x).abs());
        *x = c;
    }
    worst
}

/// One finite-difference step from `state`. Returns the new state and the
/// clamp magnitude.
pub fn step_imex(state: &State, spec: &ReactionSpec, c: f64, domain: &Domain, ctrl: &SchemeCtrl) -> Result<(State, f64)> {
    let ctrl = SchemeCtrl { scheme: Scheme::ImexFd, rannacher_steps: 0, ..*ctrl };
    single_step(state, spec, c, domain, &ctrl)
}

/// One splitting step from `state`. Returns the new state and the clamp
/// magnitude.
pub fn step_splitting(state: &State, spec: &ReactionSpec, c: f64, domain: &Domain, ctrl: &SchemeCtrl) -> Result<(State, f64)> {
    let ctrl = SchemeCtrl { scheme: Scheme::SplittingGreen, ..*ctrl };
    single_step(state, spec, c, domain, &ctrl)
}

fn single_step(state: &State, spec: &ReactionSpec, c: f64, domain: &Domain, ctrl: &SchemeCtrl) -> Result<(State, f64)> {
    if state.v.len() != domain.len() {
        return Err(Error::Config(format!("state has {} values, grid has {} nodes", state.v.len(), domain.len())));
    }
    let mut stepper = Stepper::new(spec, c, domain, ctrl)?;
    let mut v = state.v.clone();
    let clamp = stepper.step(&mut v);
    Ok((State { t: state.t + ctrl.dt, v }, clamp))
}

/// Receives snapshots as a run produces them.
pub trait SnapshotSink {
    fn accept(&mut self, state: &State) -> Result<()>;
}

/// In-memory sink keeping every snapshot.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trajectory {
    pub domain: Domain,
    pub c: f64,
    pub states: Vec<State>,
    pub max_clamp: f64,
}

impl Trajectory {
    pub fn new(domain: Domain, c: f64) -> Self {
        Self { domain, c, states: Vec::new(), max_clamp: 0.0 }
    }

    pub fn last(&self) -> Option<&State> {
        self.states.last()
    }
}

impl SnapshotSink for Trajectory {
    fn accept(&mut self, state: &State) -> Result<()> {
        self.states.push(state.clone());
        Ok(())
    }
}

/// Counters from a finished run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub steps: usize,
    pub snapshots: usize,
    pub max_clamp: f64,
    pub final_state: State,
}

/// Time horizon and snapshot cadence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunPlan {
    pub t_end: f64,
    pub snapshot_every: f64,
}

impl RunPlan {
    fn counts(&self, dt: f64) -> Result<(usize, usize)> {
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("t_end must be non-negative, got {}", self.t_end)));
        }
        if !(self.snapshot_every > 0.0) {
            return Err(Error::Config(format!("snapshot_every must be positive, got {}", self.snapshot_every)));
        }
        let steps = (self.t_end / dt).round() as usize;
        let every = ((self.snapshot_every / dt).round() as usize).max(1);
        Ok((steps, every))
    }
}

/// Advances `v0` to `plan.t_end`, sending the initial state, every
/// `snapshot_every` and the final state to `sink`.
pub fn run<S: SnapshotSink>(
    spec: &ReactionSpec,
    c: f64,
    domain: &Domain,
    v0: Vec<f64>,
    ctrl: &SchemeCtrl,
    plan: RunPlan,
    sink: &mut S,
) -> Result<RunSummary> {
    if v0.len() != domain.len() {
        return Err(Error::Config(format!("initial vector has {} values, grid has {} nodes", v0.len(), domain.len())));
    }
    let mut stepper = Stepper::new(spec, c, domain, ctrl)?;
    let (steps, every) = plan.counts(ctrl.dt)?;
    let mut state = State { t: 0.0, v: v0 };
    sink.accept(&state)?;
    let mut snapshots = 1;
    let mut last_good = state.clone();
    let mut max_clamp = 0.0_f64;
    for k in 1..=steps {
        let clamp = stepper.step(&mut state.v);
        state.t = k as f64 * ctrl.dt;
        if !clamp.is_finite() || state.v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { t: state.t, last_good: Box::new(last_good) });
        }
        max_clamp = max_clamp.max(clamp);
        if k % every == 0 || k == steps {
            sink.accept(&state)?;
            snapshots += 1;
            last_good = state.clone();
        }
    }
    Ok(RunSummary { steps, snapshots, max_clamp, final_state: state })
}

/// [`run`] into an in-memory [`Trajectory`].
pub fn simulate(spec: &ReactionSpec, c: f64, domain: &Domain, v0: Vec<f64>, ctrl: &SchemeCtrl, plan: RunPlan) -> Result<Trajectory> {
    let mut traj = Trajectory::new(*domain, c);
    let summary = run(spec, c, domain, v0, ctrl, plan, &mut traj)?;
    traj.max_clamp = summary.max_clamp;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic() -> ReactionSpec {
        ReactionSpec::cubic(0.75).unwrap()
    }

    fn small_domain() -> Domain {
        Domain::new(-10.0, 10.0, 400).unwrap()
    }

    fn ctrl(scheme: Scheme) -> SchemeCtrl {
        SchemeCtrl { scheme, dt: 0.01, ..SchemeCtrl::default() }
    }

    #[test]
    fn protected_euler_respects_equilibria() {
        let h = ReactionSpec::holder(0.75, 0.5, 0.5).unwrap();
        assert_eq!(protected_euler(&h, 1e-8, 0.1), 0.0);
        assert_eq!(protected_euler(&h, 1.0 - 1e-8, 0.1), 1.0);
        assert_eq!(protected_euler(&h, 0.75, 0.1), 0.75);
        let x = protected_euler(&h, 0.76, 100.0);
        assert!((0.75..=1.0).contains(&x));
    }

    #[test]
    fn constant_equilibria_are_fixed() {
        let spec = cubic();
        let d = small_domain();
        for scheme in [Scheme::ImexFd, Scheme::SplittingGreen] {
            for level in [0.0, 1.0] {
                let v0 = vec![level; d.len()];
                let plan = RunPlan { t_end: 1.0, snapshot_every: 1.0 };
                let traj = simulate(&spec, 0.35, &d, v0.clone(), &ctrl(scheme), plan).unwrap();
                let drift = traj.last().unwrap().v.iter().map(|x| (x - level).abs()).fold(0.0, f64::max);
                assert!(drift < 1e-12, "{scheme:?} {level} {drift}");
                assert_eq!(traj.max_clamp, 0.0);
            }
        }
    }

    #[test]
    fn guard_names_the_inequality() {
        let spec = cubic();
        let bad = SchemeCtrl { dt: 5.0, ..SchemeCtrl::default() };
        let err = bad.validate(&spec, 0.35, &small_domain()).unwrap_err().to_string();
        assert!(err.contains("dt * max_slope <= 0.5"), "{err}");
    }

    #[test]
    fn peclet_guard() {
        let spec = cubic();
        let d = Domain::new(-10.0, 10.0, 8).unwrap();
        let err = SchemeCtrl::default().validate(&spec, 0.9, &d).unwrap_err().to_string();
        assert!(err.contains("Peclet"), "{err}");
    }

    #[test]
    fn zero_horizon_returns_initial_state() {
        let spec = cubic();
        let d = small_domain();
        let v0 = InitialData::Step { at: 0.0 }.resolve(&d, None).unwrap();
        let plan = RunPlan { t_end: 0.0, snapshot_every: 0.1 };
        let traj = simulate(&spec, 0.35, &d, v0.clone(), &SchemeCtrl::default(), plan).unwrap();
        assert_eq!(traj.states.len(), 1);
        assert_eq!(traj.states[0].v, v0);
    }

    #[test]
    fn snapshots_at_requested_times() {
        let spec = cubic();
        let d = small_domain();
        let v0 = InitialData::Step { at: 0.0 }.resolve(&d, None).unwrap();
        let plan = RunPlan { t_end: 1.0, snapshot_every: 0.25 };
        let traj = simulate(&spec, 0.35, &d, v0, &ctrl(Scheme::ImexFd), plan).unwrap();
        let times: Vec<f64> = traj.states.iter().map(|s| s.t).collect();
        assert_eq!(times.len(), 5);
        for (t, e) in times.iter().zip([0.0, 0.25, 0.5, 0.75, 1.0]) {
            assert!((t - e).abs() < 1e-12);
        }
    }

    #[test]
    fn heat_kernel_variance_grows_by_two_dt() {
        let dt = 0.01;
        let dz = 0.02;
        let (off, w) = splitting::kernel_weights(dz, 0.0, dt, 8.0);
        let n = 2001;
        let centre = 1000.0;
        let var0 = 0.25_f64;
        let mut v: Vec<f64> = (0..n).map(|i| (-((i as f64 - centre) * dz).powi(2) / (2.0 * var0)).exp()).collect();
        let moments = |v: &[f64]| {
            let m0: f64 = v.iter().sum();
            let m2: f64 = v.iter().enumerate().map(|(i, x)| ((i as f64 - centre) * dz).powi(2) * x).sum();
            m2 / m0
        };
        let mut out = vec![0.0; n];
        let mut prev = moments(&v);
        for _ in 0..5 {
            splitting::convolve(&v, off, &w, &mut out, Execution::Sequential);
            v.copy_from_slice(&out);
            let var = moments(&v);
            assert!((var - prev - 2.0 * dt).abs() < 1e-6, "{}", var - prev);
            prev = var;
        }
    }

    #[test]
    fn deterministic_for_fixed_inputs() {
        let spec = cubic();
        let d = small_domain();
        let v0 = InitialData::Step { at: 0.0 }.resolve(&d, None).unwrap();
        let plan = RunPlan { t_end: 0.5, snapshot_every: 0.5 };
        for scheme in [Scheme::ImexFd, Scheme::SplittingGreen] {
            let a = simulate(&spec, 0.35, &d, v0.clone(), &ctrl(scheme), plan).unwrap();
            let b = simulate(&spec, 0.35, &d, v0.clone(), &ctrl(scheme), plan).unwrap();
            assert_eq!(a.states, b.states);
        }
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let spec = cubic();
        let d = Domain::new(-20.0, 20.0, 4000).unwrap();
        let v0 = InitialData::Step { at: 0.0 }.resolve(&d, None).unwrap();
        let plan = RunPlan { t_end: 0.1, snapshot_every: 0.1 };
        let base = SchemeCtrl { scheme: Scheme::SplittingGreen, dt: 0.002, ..SchemeCtrl::default() };
        let a = simulate(&spec, 0.35, &d, v0.clone(), &SchemeCtrl { execution: Execution::Sequential, ..base }, plan).unwrap();
        let b = simulate(&spec, 0.35, &d, v0, &SchemeCtrl { execution: Execution::Parallel, ..base }, plan).unwrap();
        assert_eq!(a.states, b.states);
    }
}
