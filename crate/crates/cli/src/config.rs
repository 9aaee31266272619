//! Run configuration: a flat `key = value` file split by `[section]` headers.
//!
//! Parsing never stops at the first problem. Every unknown key, malformed
//! value, out-of-range value and missing required key is collected with the
//! line it refers to, and the whole list is reported at once.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use sharpfront::pde::{Domain, InitialData, RunPlan, Scheme, SchemeCtrl};
use sharpfront::wave::Stepping;
use sharpfront::{Execution, ProfileControl, ReactionKind, ReactionSpec, StepControl};

/// Every section, key and default, shown by `--help`.
pub const REFERENCE: &str = "\
CONFIG FILE
  Flat `key = value` lines under `[section]` headers; `#` starts a comment.
  Words (kinds, schemes, formats) are written bare, without quotes.

  [reaction]
    kind          cubic | holder_bistable | user_table           (required)
    s0            unstable zero, in (0,1)                         (required)
    alpha0        exponent at 0, in (0,1]          (required for holder_bistable)
    alpha1        exponent at 1, in (0,1]          (required for holder_bistable)
    table         knots `s:f, s:f, ...`             (required for user_table)

  [wave]
    tol           bisection tolerance on c                        1e-8
    nodes         uniform cells of the y grid                     2000
    start_eps     length of the start interval [0, eps]           1e-4
    rtol          relative step tolerance                         1e-10
    atol          absolute step tolerance                         1e-14
    balance_tol   |y(1)| counted as balanced                      1e-10
    stepping      adaptive | fixed_rk4                            adaptive
    u_points      profile nodes                                   512

  [domain]
    z_min                                                         -40
    z_max                                                         40
    n_cells                                                       8000

  [scheme]
    scheme                imex_fd | splitting_green               imex_fd
    dt                    needs dt * max_slope <= 0.5             0.002
    theta                 implicit weight, in [0.5, 1]            0.5
    kernel_cutoff_sigmas  heat kernel truncation                  8
    rannacher_steps       backward-Euler start-up steps           2
    t_end                                                         60
    snapshot_every                                                0.5
    execution             parallel | sequential                   parallel

  [initial_data]
    kind      step | smoothed_step | profile_perturbation | table  step
    at        step position                                       0
    width     smoothing width                                     1
    left      left plateau of smoothed_step                       0
    right     right plateau of smoothed_step                      1
    epsilon   bump size of profile_perturbation                   0.01
    shift     profile shift of profile_perturbation               0
    file      CSV with columns z and u (or v)     (required for table)

  [diagnostics]
    eta              plateau margin, in (0, min(s0,1-s0)/3)   min(s0,1-s0)/6
    interval_a       left end of the energy interval     from the profile
    interval_b       right end of the energy interval    from the profile
    hypothesis_grid  cells of the hypothesis check grid           1000
    stability_probe  true | false                                 false
    probe_t_end      horizon of each probe run                    20

  [output]
    dir         output directory                                  out
    format      csv | json, for tables                            csv
    trajectory  binary | csv | none                               binary

  [sweep]   (all four keys required when the section is present)
    parameter   s0 | alpha
    from
    to
    points      number of grid values, at least 1
";

const SECTIONS: &[(&str, &[&str])] = &[
    ("reaction", &["kind", "s0", "alpha0", "alpha1", "table"]),
    ("wave", &["tol", "nodes", "start_eps", "rtol", "atol", "balance_tol", "stepping", "u_points"]),
    ("domain", &["z_min", "z_max", "n_cells"]),
    (
        "scheme",
        &["scheme", "dt", "theta", "kernel_cutoff_sigmas", "rannacher_steps", "t_end", "snapshot_every", "execution"],
    ),
    ("initial_data", &["kind", "at", "width", "left", "right", "epsilon", "shift", "file"]),
    ("diagnostics", &["eta", "interval_a", "interval_b", "hypothesis_grid", "stability_probe", "probe_t_end"]),
    ("output", &["dir", "format", "trajectory"]),
    ("sweep", &["parameter", "from", "to", "points"]),
];

/// All problems found in a config file, one per line.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join("\n"))
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(word: &str) -> Option<Self> {
        match word {
            "csv" => Some(Self::Csv),
            "json" => Some(Self::Json),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrajectoryFormat {
    Binary,
    Csv,
    None,
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialSource {
    Data(InitialData),
    /// Piecewise-linear data read from a CSV file.
    File(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveConfig {
    pub tol: f64,
    pub step: StepControl,
    pub profile: ProfileControl,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticsConfig {
    pub eta: f64,
    pub interval: Option<(f64, f64)>,
    pub hypothesis_grid: usize,
    pub stability_probe: bool,
    pub probe_t_end: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: Format,
    pub trajectory: TrajectoryFormat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParameter {
    S0,
    /// Both exponents of a Hölder reaction at once.
    Alpha,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl SweepConfig {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.from];
        }
        let h = (self.to - self.from) / (self.points - 1) as f64;
        (0..self.points).map(|k| if k + 1 == self.points { self.to } else { self.from + k as f64 * h }).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub reaction: ReactionSpec,
    pub wave: WaveConfig,
    pub domain: Domain,
    pub scheme: SchemeCtrl,
    pub plan: RunPlan,
    pub initial: InitialSource,
    pub diagnostics: DiagnosticsConfig,
    pub output: OutputConfig,
    pub sweep: Option<SweepConfig>,
}

impl RunConfig {
    /// Reads and parses `path`; a relative `initial_data.file` is taken
    /// relative to the config file.
    pub fn load(path: &Path) -> Result<Self, ConfigErrors> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigErrors(vec![format!("cannot read {}: {e}", path.display())]))?;
        let mut cfg = parse_config(&text)?;
        if let InitialSource::File(file) = &mut cfg.initial {
            if file.is_relative() {
                if let Some(base) = path.parent() {
                    *file = base.join(&*file);
                }
            }
        }
        Ok(cfg)
    }
}

struct Entry {
    value: String,
    line: usize,
}

#[derive(Default)]
struct Section {
    header_line: usize,
    entries: BTreeMap<&'static str, Entry>,
}

struct Raw {
    sections: BTreeMap<&'static str, Section>,
    last_line: usize,
}

fn split_lines(text: &str, errors: &mut Vec<String>) -> Raw {
    let mut sections: BTreeMap<&'static str, Section> = BTreeMap::new();
    // `Err(())` after an unknown header: its keys are skipped silently.
    let mut current: Result<Option<(&'static str, &'static [&'static str])>, ()> = Ok(None);
    let mut last_line = 0;
    for (k, full) in text.lines().enumerate() {
        let line = k + 1;
        last_line = line;
        let body = full.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(name) = body.strip_prefix('[').and_then(|b| b.strip_suffix(']')) {
            let name = name.trim();
            match SECTIONS.iter().find(|(s, _)| *s == name) {
                Some(&(s, keys)) => {
                    if sections.contains_key(s) {
                        errors.push(format!("line {line}: section [{s}] appears twice"));
                    }
                    sections.entry(s).or_default().header_line = line;
                    current = Ok(Some((s, keys)));
                }
                None => {
                    errors.push(format!("line {line}: unknown section [{name}]"));
                    current = Err(());
                }
            }
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            errors.push(format!("line {line}: expected `key = value` or `[section]`, got `{body}`"));
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        let (section, keys) = match current {
            Ok(Some(found)) => found,
            Ok(None) => {
                errors.push(format!("line {line}: key `{key}` appears before any [section] header"));
                continue;
            }
            Err(()) => continue,
        };
        let Some(&known) = keys.iter().find(|k| **k == key) else {
            errors.push(format!("line {line}: unknown key `{key}` in [{section}]"));
            continue;
        };
        let entries = &mut sections.get_mut(section).unwrap().entries;
        if let Some(prev) = entries.get(known) {
            errors.push(format!("line {line}: key `{key}` in [{section}] already set on line {}", prev.line));
            continue;
        }
        entries.insert(known, Entry { value: value.to_string(), line });
    }
    Raw { sections, last_line }
}

/// Typed access to the raw entries, recording every failure.
struct Reader<'a> {
    raw: &'a Raw,
    errors: Vec<String>,
}

impl<'a> Reader<'a> {
    fn entry(&self, section: &str, key: &str) -> Option<&'a Entry> {
        self.raw.sections.get(section).and_then(|s| s.entries.get(key))
    }

    fn has_section(&self, section: &str) -> bool {
        self.raw.sections.contains_key(section)
    }

    /// Line of the key, else of its section header, else the last line.
    fn line(&self, section: &str, key: &str) -> usize {
        match (self.entry(section, key), self.raw.sections.get(section)) {
            (Some(e), _) => e.line,
            (None, Some(s)) => s.header_line,
            (None, None) => self.raw.last_line.max(1),
        }
    }

    fn fail(&mut self, section: &str, key: &str, msg: impl fmt::Display) {
        let line = self.line(section, key);
        self.errors.push(format!("line {line}: [{section}] {msg}"));
    }

    fn missing(&mut self, section: &str, key: &str, why: &str) {
        self.fail(section, key, format!("missing required key `{key}`{why}"));
    }

    fn check(&mut self, section: &str, key: &str, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.fail(section, key, msg());
        }
    }

    fn opt_f64(&mut self, section: &str, key: &str) -> Option<f64> {
        let e = self.entry(section, key)?;
        match e.value.parse::<f64>() {
            Ok(x) if x.is_finite() => Some(x),
            _ => {
                self.fail(section, key, format!("{key}: expected a finite number, got `{}`", e.value));
                None
            }
        }
    }

    fn f64(&mut self, section: &str, key: &str, default: f64) -> f64 {
        self.opt_f64(section, key).unwrap_or(default)
    }

    fn usize(&mut self, section: &str, key: &str, default: usize) -> usize {
        let Some(e) = self.entry(section, key) else { return default };
        e.value.parse::<usize>().unwrap_or_else(|_| {
            self.fail(section, key, format!("{key}: expected a non-negative integer, got `{}`", e.value));
            default
        })
    }

    /// One of `allowed`, or `default` when absent.
    fn word(&mut self, section: &str, key: &str, default: &'static str, allowed: &[&'static str]) -> &'static str {
        let Some(e) = self.entry(section, key) else { return default };
        match allowed.iter().find(|w| **w == e.value) {
            Some(w) => w,
            None => {
                self.fail(section, key, format!("{key} must be one of {}, got `{}`", allowed.join(" | "), e.value));
                default
            }
        }
    }

    fn text(&self, section: &str, key: &str) -> Option<&'a str> {
        self.entry(section, key).map(|e| e.value.as_str())
    }
}

fn in_open_unit(x: f64) -> bool {
    x > 0.0 && x < 1.0
}

fn is_exponent(x: f64) -> bool {
    x > 0.0 && x <= 1.0
}

fn parse_knots(text: &str) -> Result<Vec<(f64, f64)>, String> {
    text.split(',')
        .map(|pair| {
            let (s, f) = pair.split_once(':').ok_or_else(|| format!("knot `{}` is not of the form s:f", pair.trim()))?;
            let s = s.trim().parse::<f64>().map_err(|_| format!("bad knot position `{}`", s.trim()))?;
            let f = f.trim().parse::<f64>().map_err(|_| format!("bad knot value `{}`", f.trim()))?;
            Ok((s, f))
        })
        .collect()
}

fn read_reaction(r: &mut Reader) -> Option<ReactionSpec> {
    const S: &str = "reaction";
    let kind = match r.text(S, "kind") {
        None => {
            r.missing(S, "kind", "");
            None
        }
        Some(word) => {
            let parsed = ReactionKind::parse(word);
            if parsed.is_none() {
                r.fail(S, "kind", format!("kind must be one of cubic | holder_bistable | user_table, got `{word}`"));
            }
            parsed
        }
    };
    let s0 = match r.opt_f64(S, "s0") {
        Some(s0) if in_open_unit(s0) => Some(s0),
        Some(s0) => {
            r.fail(S, "s0", format!("s0 must lie in (0,1), got {s0}"));
            None
        }
        None => {
            if r.entry(S, "s0").is_none() {
                r.missing(S, "s0", "");
            }
            None
        }
    };
    let exponent = |r: &mut Reader, key: &str, needed: bool| -> Option<f64> {
        match r.opt_f64(S, key) {
            Some(a) if is_exponent(a) => Some(a),
            Some(a) => {
                r.fail(S, key, format!("{key} must lie in (0,1], got {a}"));
                None
            }
            None => {
                if needed && r.entry(S, key).is_none() {
                    r.missing(S, key, " for holder_bistable");
                }
                None
            }
        }
    };
    let holder = kind == Some(ReactionKind::HolderBistable);
    let a0 = exponent(r, "alpha0", holder);
    let a1 = exponent(r, "alpha1", holder);
    let knots = match r.text(S, "table") {
        Some(text) => match parse_knots(text) {
            Ok(k) => Some(k),
            Err(msg) => {
                r.fail(S, "table", msg);
                None
            }
        },
        None => {
            if kind == Some(ReactionKind::UserTable) {
                r.missing(S, "table", " for user_table");
            }
            None
        }
    };
    let built = match (kind?, s0?) {
        (ReactionKind::Cubic, s0) => ReactionSpec::cubic(s0),
        (ReactionKind::HolderBistable, s0) => ReactionSpec::holder(s0, a0?, a1?),
        (ReactionKind::UserTable, s0) => ReactionSpec::user_table(s0, knots?),
    };
    match built {
        Ok(spec) => Some(spec),
        Err(e) => {
            let key = if kind == Some(ReactionKind::UserTable) { "table" } else { "kind" };
            r.fail(S, key, e);
            None
        }
    }
}

fn read_wave(r: &mut Reader) -> WaveConfig {
    const S: &str = "wave";
    let d = StepControl::default();
    let p = ProfileControl::default();
    let tol = r.f64(S, "tol", 1e-8);
    r.check(S, "tol", tol > 0.0, || format!("tol must be positive, got {tol}"));
    let nodes = r.usize(S, "nodes", d.nodes);
    r.check(S, "nodes", nodes >= 10, || format!("nodes must be at least 10, got {nodes}"));
    let start_eps = r.f64(S, "start_eps", d.start_eps);
    r.check(S, "start_eps", start_eps > 0.0 && start_eps <= 1e-2, || {
        format!("start_eps must lie in (0, 0.01], got {start_eps}")
    });
    let rtol = r.f64(S, "rtol", d.rtol);
    r.check(S, "rtol", rtol > 0.0, || format!("rtol must be positive, got {rtol}"));
    let atol = r.f64(S, "atol", d.atol);
    r.check(S, "atol", atol > 0.0, || format!("atol must be positive, got {atol}"));
    let balance_tol = r.f64(S, "balance_tol", d.balance_tol);
    r.check(S, "balance_tol", balance_tol > 0.0, || format!("balance_tol must be positive, got {balance_tol}"));
    let stepping = match r.word(S, "stepping", "adaptive", &["adaptive", "fixed_rk4"]) {
        "fixed_rk4" => Stepping::FixedRk4,
        _ => Stepping::Adaptive,
    };
    let u_points = r.usize(S, "u_points", p.u_points);
    r.check(S, "u_points", u_points >= 16, || format!("u_points must be at least 16, got {u_points}"));
    WaveConfig {
        tol,
        step: StepControl { start_eps, nodes, rtol, atol, balance_tol, stepping, ..d },
        profile: ProfileControl { u_points, ..p },
    }
}

fn read_domain(r: &mut Reader) -> Option<Domain> {
    const S: &str = "domain";
    let z_min = r.f64(S, "z_min", -40.0);
    let z_max = r.f64(S, "z_max", 40.0);
    let n_cells = r.usize(S, "n_cells", 8000);
    let before = r.errors.len();
    r.check(S, "z_max", z_min < z_max, || format!("z_min must be below z_max, got [{z_min}, {z_max}]"));
    r.check(S, "n_cells", n_cells >= 4, || format!("n_cells must be at least 4, got {n_cells}"));
    if r.errors.len() > before {
        return None;
    }
    Domain::new(z_min, z_max, n_cells).ok()
}

fn read_scheme(r: &mut Reader, spec: Option<&ReactionSpec>) -> (SchemeCtrl, RunPlan) {
    const S: &str = "scheme";
    let d = SchemeCtrl::default();
    let scheme = Scheme::parse(r.word(S, "scheme", "imex_fd", &["imex_fd", "splitting_green"])).unwrap_or(Scheme::ImexFd);
    let dt = r.f64(S, "dt", d.dt);
    let theta = r.f64(S, "theta", d.theta);
    let kernel_cutoff_sigmas = r.f64(S, "kernel_cutoff_sigmas", d.kernel_cutoff_sigmas);
    let rannacher_steps = r.usize(S, "rannacher_steps", d.rannacher_steps);
    let t_end = r.f64(S, "t_end", 60.0);
    let snapshot_every = r.f64(S, "snapshot_every", 0.5);
    let execution = match r.word(S, "execution", "parallel", &["parallel", "sequential"]) {
        "sequential" => Execution::Sequential,
        _ => Execution::Parallel,
    };
    let ctrl = SchemeCtrl { scheme, dt, theta, kernel_cutoff_sigmas, rannacher_steps, execution };
    if dt > 0.0 {
        if let Some(spec) = spec {
            let courant = ctrl.reaction_courant(spec);
            r.check(S, "dt", courant <= 0.5, || {
                format!("dt = {dt} violates the stability guard dt * max_slope <= 0.5 (dt * max_slope = {courant:.6})")
            });
        }
    } else {
        r.fail(S, "dt", format!("dt must be positive, got {dt}"));
    }
    r.check(S, "theta", (0.5..=1.0).contains(&theta), || format!("theta must lie in [0.5, 1], got {theta}"));
    r.check(S, "kernel_cutoff_sigmas", kernel_cutoff_sigmas > 0.0, || {
        format!("kernel_cutoff_sigmas must be positive, got {kernel_cutoff_sigmas}")
    });
    r.check(S, "t_end", t_end >= 0.0, || format!("t_end must be non-negative, got {t_end}"));
    r.check(S, "snapshot_every", snapshot_every > 0.0, || {
        format!("snapshot_every must be positive, got {snapshot_every}")
    });
    (ctrl, RunPlan { t_end, snapshot_every })
}

fn read_initial(r: &mut Reader) -> InitialSource {
    const S: &str = "initial_data";
    let kind = r.word(S, "kind", "step", &["step", "smoothed_step", "profile_perturbation", "table"]);
    let at = r.f64(S, "at", 0.0);
    let width = r.f64(S, "width", 1.0);
    let left = r.f64(S, "left", 0.0);
    let right = r.f64(S, "right", 1.0);
    let epsilon = r.f64(S, "epsilon", 0.01);
    let shift = r.f64(S, "shift", 0.0);
    match kind {
        "smoothed_step" => {
            r.check(S, "width", width > 0.0, || format!("width must be positive, got {width}"));
            r.check(S, "left", (0.0..=1.0).contains(&left), || format!("left must lie in [0,1], got {left}"));
            r.check(S, "right", (0.0..=1.0).contains(&right), || format!("right must lie in [0,1], got {right}"));
            InitialSource::Data(InitialData::SmoothedStep { at, width, left, right })
        }
        "profile_perturbation" => {
            r.check(S, "epsilon", (0.0..1.0).contains(&epsilon), || format!("epsilon must lie in [0,1), got {epsilon}"));
            InitialSource::Data(InitialData::ProfilePerturbation { epsilon, shift })
        }
        "table" => match r.text(S, "file") {
            Some(file) => InitialSource::File(PathBuf::from(file)),
            None => {
                r.missing(S, "file", " for kind = table");
                InitialSource::File(PathBuf::new())
            }
        },
        _ => InitialSource::Data(InitialData::Step { at }),
    }
}

fn read_diagnostics(r: &mut Reader, s0: Option<f64>) -> DiagnosticsConfig {
    const S: &str = "diagnostics";
    let bound = s0.map_or(1.0 / 6.0, |s0| s0.min(1.0 - s0) / 3.0);
    let eta = r.f64(S, "eta", bound / 2.0);
    r.check(S, "eta", eta > 0.0 && eta < bound, || format!("eta must lie in (0, min(s0,1-s0)/3) = (0, {bound}), got {eta}"));
    let a = r.opt_f64(S, "interval_a");
    let b = r.opt_f64(S, "interval_b");
    let interval = match (a, b) {
        (Some(a), Some(b)) => {
            r.check(S, "interval_b", a < b, || format!("interval_a must be below interval_b, got [{a}, {b}]"));
            Some((a, b))
        }
        (None, None) => None,
        (Some(_), None) => {
            r.missing(S, "interval_b", " when interval_a is set");
            None
        }
        (None, Some(_)) => {
            r.missing(S, "interval_a", " when interval_b is set");
            None
        }
    };
    let hypothesis_grid = r.usize(S, "hypothesis_grid", 1000);
    r.check(S, "hypothesis_grid", hypothesis_grid >= 100, || {
        format!("hypothesis_grid must be at least 100, got {hypothesis_grid}")
    });
    let stability_probe = r.word(S, "stability_probe", "false", &["true", "false"]) == "true";
    let probe_t_end = r.f64(S, "probe_t_end", 20.0);
    r.check(S, "probe_t_end", probe_t_end > 0.0, || format!("probe_t_end must be positive, got {probe_t_end}"));
    DiagnosticsConfig { eta, interval, hypothesis_grid, stability_probe, probe_t_end }
}

fn read_output(r: &mut Reader) -> OutputConfig {
    const S: &str = "output";
    let dir = PathBuf::from(r.text(S, "dir").unwrap_or("out"));
    let format = Format::parse(r.word(S, "format", "csv", &["csv", "json"])).unwrap_or(Format::Csv);
    let trajectory = match r.word(S, "trajectory", "binary", &["binary", "csv", "none"]) {
        "csv" => TrajectoryFormat::Csv,
        "none" => TrajectoryFormat::None,
        _ => TrajectoryFormat::Binary,
    };
    OutputConfig { dir, format, trajectory }
}

fn read_sweep(r: &mut Reader, kind: Option<ReactionKind>) -> Option<SweepConfig> {
    const S: &str = "sweep";
    if !r.has_section(S) {
        return None;
    }
    let parameter = match r.text(S, "parameter") {
        None => {
            r.missing(S, "parameter", "");
            None
        }
        Some(_) => match r.word(S, "parameter", "s0", &["s0", "alpha"]) {
            "alpha" => Some(SweepParameter::Alpha),
            _ => Some(SweepParameter::S0),
        },
    };
    let bound = |r: &mut Reader, key: &str| {
        let v = r.opt_f64(S, key);
        if r.entry(S, key).is_none() {
            r.missing(S, key, "");
        }
        v
    };
    let from = bound(r, "from");
    let to = bound(r, "to");
    let points = match r.entry(S, "points") {
        None => {
            r.missing(S, "points", "");
            None
        }
        Some(_) => Some(r.usize(S, "points", 0)),
    };
    if let Some(p) = points {
        r.check(S, "points", p >= 1, || "points must be at least 1".to_string());
    }
    if let (Some(from), Some(to)) = (from, to) {
        r.check(S, "to", from <= to, || format!("from must not exceed to, got [{from}, {to}]"));
        match parameter {
            Some(SweepParameter::S0) => {
                r.check(S, "from", in_open_unit(from), || format!("s0 must lie in (0,1), got from = {from}"));
                r.check(S, "to", in_open_unit(to), || format!("s0 must lie in (0,1), got to = {to}"));
                r.check(S, "parameter", kind != Some(ReactionKind::UserTable), || {
                    "an s0 sweep needs a parametric reaction, not user_table".to_string()
                });
            }
            Some(SweepParameter::Alpha) => {
                r.check(S, "from", is_exponent(from), || format!("alpha must lie in (0,1], got from = {from}"));
                r.check(S, "to", is_exponent(to), || format!("alpha must lie in (0,1], got to = {to}"));
                r.check(S, "parameter", kind == Some(ReactionKind::HolderBistable), || {
                    "an alpha sweep needs kind = holder_bistable".to_string()
                });
            }
            None => {}
        }
    }
    Some(SweepConfig { parameter: parameter?, from: from?, to: to?, points: points? })
}

/// Parses and validates a whole config, or lists every problem found.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    let mut errors = Vec::new();
    let raw = split_lines(text, &mut errors);
    let mut r = Reader { raw: &raw, errors };
    if !r.has_section("reaction") {
        r.fail("reaction", "kind", "section [reaction] is required");
    }
    let reaction = read_reaction(&mut r);
    let wave = read_wave(&mut r);
    let domain = read_domain(&mut r);
    let (scheme, plan) = read_scheme(&mut r, reaction.as_ref());
    let initial = read_initial(&mut r);
    let diagnostics = read_diagnostics(&mut r, reaction.as_ref().map(|s| s.s0()));
    let output = read_output(&mut r);
    let sweep = read_sweep(&mut r, reaction.as_ref().map(|s| s.kind()));
    let mut errors = r.errors;
    errors.sort_by_key(|e| e.strip_prefix("line ").and_then(|t| t.split(':').next()).and_then(|n| n.parse::<usize>().ok()));
    match (reaction, domain) {
        (Some(reaction), Some(domain)) if errors.is_empty() => Ok(RunConfig {
            reaction,
            wave,
            domain,
            scheme,
            plan,
            initial,
            diagnostics,
            output,
            sweep,
        }),
        _ => Err(ConfigErrors(errors)),
    }
}
