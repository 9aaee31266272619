//! Bistable reaction terms `f` with zeros at `0 < s0 < 1`, their potential
//! `F(r) = ∫_0^r f`, and grid checks of the structural hypotheses.
//!
//! Three families are supported:
//!
//! * `cubic`: `f(s) = s (1 - s) (s - s0)` on the whole line.
//! * `holder_bistable`: `f(s) = s^a0 (1 - s)^a1 (s - s0)` on `[0, 1]`, extended
//!   by `-s` below 0 and `1 - s` above 1.
//! * `user_table`: piecewise-linear through user knots on `[0, 1]`, with the
//!   same extension as `holder_bistable`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::quadrature;

/// Absolute tolerance for quadrature of `F`.
pub const POTENTIAL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReactionKind {
    Cubic,
    HolderBistable,
    UserTable,
}

impl ReactionKind {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "cubic" => Some(Self::Cubic),
            "holder_bistable" => Some(Self::HolderBistable),
            "user_table" => Some(Self::UserTable),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Cubic => "cubic",
            Self::HolderBistable => "holder_bistable",
            Self::UserTable => "user_table",
        }
    }
}

/// A validated reaction term.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReactionSpec {
    kind: ReactionKind,
    s0: f64,
    alpha0: f64,
    alpha1: f64,
    #[serde(skip)]
    knots: Vec<(f64, f64)>,
}

fn check_unit_open(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidReaction(format!("{name} must lie in (0,1), got {v}")))
    }
}

fn check_exponent(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidReaction(format!("{name} must lie in (0,1], got {v}")))
    }
}

impl ReactionSpec {
    /// `f(s) = s (1 - s) (s - s0)`. A positive speed needs `s0 > 1/2`; smaller
    /// values are accepted here and reported by [`check_hypotheses`].
    pub fn cubic(s0: f64) -> Result<Self> {
        check_unit_open("s0", s0)?;
        Ok(Self { kind: ReactionKind::Cubic, s0, alpha0: 1.0, alpha1: 1.0, knots: Vec::new() })
    }

    pub fn holder(s0: f64, alpha0: f64, alpha1: f64) -> Result<Self> {
        check_unit_open("s0", s0)?;
        check_exponent("alpha0", alpha0)?;
        check_exponent("alpha1", alpha1)?;
        Ok(Self { kind: ReactionKind::HolderBistable, s0, alpha0, alpha1, knots: Vec::new() })
    }

    /// Piecewise-linear `f` through `(s, f(s))` knots. The knots must be
    /// strictly increasing, start at 0, end at 1 and contain `s0`; the value
    /// at each of the three zeros must vanish.
    pub fn user_table(s0: f64, knots: Vec<(f64, f64)>) -> Result<Self> {
        check_unit_open("s0", s0)?;
        if knots.len() < 3 {
            return Err(Error::InvalidReaction("user table needs at least 3 knots".into()));
        }
        if knots.iter().any(|(s, v)| !s.is_finite() || !v.is_finite()) {
            return Err(Error::InvalidReaction("user table contains non-finite entries".into()));
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidReaction("user table knots must be strictly increasing".into()));
        }
        let first = knots[0];
        let last = knots[knots.len() - 1];
        if first.0 != 0.0 || last.0 != 1.0 {
            return Err(Error::InvalidReaction("user table must span exactly [0, 1]".into()));
        }
        let Some(mid) = knots.iter().find(|(s, _)| *s == s0) else {
            return Err(Error::InvalidReaction(format!("user table has no knot at s0 = {s0}")));
        };
        for (s, v) in [first, *mid, last] {
            if v != 0.0 {
                return Err(Error::InvalidReaction(format!("user table value at s = {s} must be 0, got {v}")));
            }
        }
        Ok(Self { kind: ReactionKind::UserTable, s0, alpha0: 1.0, alpha1: 1.0, knots })
    }

    pub fn kind(&self) -> ReactionKind {
        self.kind
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn extension_rule(&self) -> &'static str {
        match self.kind {
            ReactionKind::Cubic => "polynomial on the whole line",
            _ => "f(s) = -s for s < 0, f(s) = 1 - s for s > 1",
        }
    }

    /// Limits of `|f(r)| / r^a0` as `r -> 0+` and `|f(1 - d)| / d^a1` as `d -> 0+`.
    pub fn endpoint_coefficients(&self) -> (f64, f64) {
        match self.kind {
            ReactionKind::Cubic | ReactionKind::HolderBistable => (self.s0, 1.0 - self.s0),
            ReactionKind::UserTable => {
                let k = &self.knots;
                let n = k.len();
                let g0 = (k[1].1 / k[1].0).abs();
                let g1 = (k[n - 2].1 / (1.0 - k[n - 2].0)).abs();
                (g0, g1)
            }
        }
    }

    /// The reaction term. Total, with exact zeros at 0, `s0` and 1.
    pub fn f(&self, s: f64) -> f64 {
        let s0 = self.s0;
        match self.kind {
            ReactionKind::Cubic => s * (1.0 - s) * (s - s0),
            _ if s <= 0.0 => -s,
            _ if s >= 1.0 => 1.0 - s,
            ReactionKind::HolderBistable => s.powf(self.alpha0) * (1.0 - s).powf(self.alpha1) * (s - s0),
            ReactionKind::UserTable => {
                let k = &self.knots;
                let j = k.partition_point(|(x, _)| *x <= s).clamp(1, k.len() - 1);
                let (xa, ya) = k[j - 1];
                let (xb, yb) = k[j];
                ya + (yb - ya) * (s - xa) / (xb - xa)
            }
        }
    }

    /// `F(r)` in closed form when one exists.
    fn closed_potential(&self, r: f64) -> Option<f64> {
        let s0 = self.s0;
        match self.kind {
            ReactionKind::Cubic => {
                let r2 = r * r;
                Some(r2 * (-r2 / 4.0 + (1.0 + s0) * r / 3.0 - s0 / 2.0))
            }
            _ if r <= 0.0 => Some(-0.5 * r * r),
            ReactionKind::UserTable => {
                let clipped = r.min(1.0);
                let mut acc = 0.0;
                for w in self.knots.windows(2) {
                    let (xa, ya) = w[0];
                    let (xb, yb) = w[1];
                    if xa >= clipped {
                        break;
                    }
                    let hi = xb.min(clipped);
                    let yh = ya + (yb - ya) * (hi - xa) / (xb - xa);
                    acc += 0.5 * (hi - xa) * (ya + yh);
                }
                if r > 1.0 {
                    acc -= 0.5 * (r - 1.0) * (r - 1.0);
                }
                Some(acc)
            }
            ReactionKind::HolderBistable => None,
        }
    }

    /// `F(r) = ∫_0^r f(s) ds`, accurate to [`POTENTIAL_TOL`].
    pub fn potential(&self, r: f64) -> Result<f64> {
        if let Some(v) = self.closed_potential(r) {
            return Ok(v);
        }
        if r <= 1.0 {
            return Ok(quadrature::integrate(|s| self.f(s), 0.0, r, POTENTIAL_TOL)?.value);
        }
        let f1 = quadrature::integrate(|s| self.f(s), 0.0, 1.0, POTENTIAL_TOL)?.value;
        Ok(f1 - 0.5 * (r - 1.0) * (r - 1.0))
    }

    /// `F` at every point of an increasing grid inside `[0, 1]`, by
    /// cumulative quadrature over consecutive cells.
    pub fn potential_on_grid(&self, grid: &[f64]) -> Result<Vec<f64>> {
        if self.closed_potential(0.5).is_some() {
            return Ok(grid.iter().map(|&r| self.closed_potential(r).unwrap()).collect());
        }
        let mut out = Vec::with_capacity(grid.len());
        let mut prev = 0.0;
        let mut acc = 0.0;
        let cell_tol = POTENTIAL_TOL / (grid.len().max(1) as f64);
        for &r in grid {
            acc += quadrature::integrate(|s| self.f(s), prev, r, cell_tol.max(1e-15))?.value;
            prev = r;
            out.push(acc);
        }
        Ok(out)
    }

    /// Upper bound on `|f'|` used by explicit time-step guards: the larger of
    /// the one-sided constant and the sampled slope magnitude on a `1e-3` grid.
    pub fn slope_bound(&self, lipschitz: f64) -> f64 {
        let n = 1000;
        let h = 1.0 / n as f64;
        let sampled = (0..n)
            .map(|i| {
                let a = i as f64 * h;
                ((self.f(a + h) - self.f(a)) / h).abs()
            })
            .fold(1.0_f64, f64::max);
        sampled.max(lipschitz)
    }
}

/// Fast evaluation of `F` on `[0, 1]` through a cubic Hermite table whose
/// nodes cluster toward both endpoints. Closed forms are used when available.
#[derive(Clone, Debug)]
pub struct Potential {
    spec: ReactionSpec,
    nodes: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    f1: f64,
}

impl Potential {
    pub fn new(spec: &ReactionSpec, n: usize) -> Result<Self> {
        let n = n.max(8);
        if spec.closed_potential(0.5).is_some() {
            let f1 = spec.closed_potential(1.0).unwrap();
            return Ok(Self { spec: spec.clone(), nodes: Vec::new(), values: Vec::new(), slopes: Vec::new(), f1 });
        }
        let nodes: Vec<f64> = (0..=n)
            .map(|j| 0.5 * (1.0 - (std::f64::consts::PI * j as f64 / n as f64).cos()))
            .collect();
        let values = spec.potential_on_grid(&nodes)?;
        let slopes = nodes.iter().map(|&s| spec.f(s)).collect();
        let f1 = values[n];
        Ok(Self { spec: spec.clone(), nodes, values, slopes, f1 })
    }

    pub fn at_one(&self) -> f64 {
        self.f1
    }

    pub fn eval(&self, r: f64) -> f64 {
        if self.nodes.is_empty() {
            return self.spec.closed_potential(r).unwrap();
        }
        if r <= 0.0 {
            return -0.5 * r * r;
        }
        if r >= 1.0 {
            return self.f1 - 0.5 * (r - 1.0) * (r - 1.0);
        }
        let n = self.nodes.len() - 1;
        let t = (1.0 - 2.0 * r).clamp(-1.0, 1.0).acos() / std::f64::consts::PI * n as f64;
        let mut j = (t.floor() as usize).min(n - 1);
        // Guard against rounding in the inverse map.
        while j > 0 && self.nodes[j] > r {
            j -= 1;
        }
        while j + 1 < n && self.nodes[j + 1] < r {
            j += 1;
        }
        let (xa, xb) = (self.nodes[j], self.nodes[j + 1]);
        let h = xb - xa;
        let u = (r - xa) / h;
        let h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
        let h10 = u * (1.0 - u) * (1.0 - u);
        let h01 = u * u * (3.0 - 2.0 * u);
        let h11 = u * u * (u - 1.0);
        h00 * self.values[j] + h10 * h * self.slopes[j] + h01 * self.values[j + 1] + h11 * h * self.slopes[j + 1]
    }
}

/// Least-squares fit of `y ≈ C x^p` in log–log coordinates. Pairs with a
/// non-positive coordinate are skipped; returns `(p, C)`.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, (my - slope * mx).exp()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecantConstants {
    pub eta: f64,
    pub delta: f64,
    pub mu_under: f64,
    pub mu_over: f64,
}

impl SecantConstants {
    pub fn mu(&self) -> f64 {
        self.mu_under.min(self.mu_over)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaEstimate {
    pub at_zero: Option<f64>,
    pub at_one: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub hypothesis: String,
    pub location: Option<f64>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub h1_ok: bool,
    pub h2_alpha_estimate: AlphaEstimate,
    pub h3_l: f64,
    pub h4: Option<SecantConstants>,
    pub f1: f64,
    pub violations: Vec<Violation>,
}

impl HypothesisReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Largest secant slope `(f(s') - f(s)) / (s' - s)` over grid pairs at
/// least one cell apart, floored at 0.
pub fn one_sided_lipschitz(spec: &ReactionSpec, grid_n: usize, exec: Execution) -> f64 {
    let n = grid_n.max(1);
    let h = 1.0 / n as f64;
    let values: Vec<f64> = (0..=n).map(|i| spec.f(i as f64 * h)).collect();
    let sup = exec.max_over(n, |i| {
        let mut best = f64::NEG_INFINITY;
        for j in i + 1..=n {
            let slope = (values[j] - values[i]) / ((j - i) as f64 * h);
            best = best.max(slope);
        }
        best
    });
    sup.max(0.0)
}

fn estimate_alpha(spec: &ReactionSpec) -> AlphaEstimate {
    let d: Vec<f64> = (0..=30).map(|k| 1e-6 * 1e3f64.powf(k as f64 / 30.0)).collect();
    let near0: Vec<f64> = d.iter().map(|&x| spec.f(x).abs()).collect();
    let near1: Vec<f64> = d.iter().map(|&x| spec.f(1.0 - x).abs()).collect();
    AlphaEstimate {
        at_zero: fit_power_law(&d, &near0).map(|p| p.0),
        at_one: fit_power_law(&d, &near1).map(|p| p.0),
    }
}

/// Grid verification of the sign pattern, the sign of `F`, Hölder exponents
/// and the one-sided Lipschitz constant. When `eta` is given the secant
/// constants are estimated too. Problems are collected, never raised, except
/// quadrature failure while computing `F`.
pub fn check_hypotheses(spec: &ReactionSpec, grid_n: usize, eta: Option<f64>) -> Result<HypothesisReport> {
    if grid_n < 100 {
        return Err(Error::Config(format!("grid_n must be at least 100, got {grid_n}")));
    }
    let s0 = spec.s0();
    let mut violations = Vec::new();
    let h = 1.0 / grid_n as f64;

    for i in 1..grid_n {
        let s = i as f64 * h;
        let v = spec.f(s);
        let ok = if s == s0 { v == 0.0 } else { v * (s - s0) > 0.0 };
        if !ok {
            violations.push(Violation {
                hypothesis: "sign_pattern".into(),
                location: Some(s),
                detail: format!("f({s})={v} has the wrong sign"),
            });
        }
    }
    for k in 1..=100 {
        let d = k as f64 / 100.0;
        if spec.f(-d) <= 0.0 {
            violations.push(Violation {
                hypothesis: "sign_pattern".into(),
                location: Some(-d),
                detail: format!("f({})={} not > 0", -d, spec.f(-d)),
            });
        }
        if spec.f(1.0 + d) >= 0.0 {
            violations.push(Violation {
                hypothesis: "sign_pattern".into(),
                location: Some(1.0 + d),
                detail: format!("f({})={} not < 0", 1.0 + d, spec.f(1.0 + d)),
            });
        }
    }

    let grid: Vec<f64> = (1..=grid_n).map(|i| i as f64 * h).collect();
    let big_f = spec.potential_on_grid(&grid)?;
    let f1 = spec.potential(1.0)?;
    for (r, v) in grid.iter().zip(&big_f).take(grid_n - 1) {
        if *v >= 0.0 {
            violations.push(Violation {
                hypothesis: "potential".into(),
                location: Some(*r),
                detail: format!("F({r})={v} not < 0"),
            });
        }
    }
    if f1 >= 0.0 {
        violations.push(Violation {
            hypothesis: "potential".into(),
            location: Some(1.0),
            detail: format!("F(1)={f1} not < 0"),
        });
    }
    let h1_ok = violations.is_empty();

    let h4 = match eta {
        None => None,
        Some(eta) => match estimate_secant_constants(spec, eta) {
            Ok(c) => Some(c),
            Err(e) => {
                violations.push(Violation { hypothesis: "secant".into(), location: None, detail: e.to_string() });
                None
            }
        },
    };

    Ok(HypothesisReport {
        h1_ok,
        h2_alpha_estimate: estimate_alpha(spec),
        h3_l: one_sided_lipschitz(spec, grid_n, Execution::default()),
        h4,
        f1,
        violations,
    })
}

/// Points `lo, lo + step, ...` up to and including `hi`.
fn grid_inclusive(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).ceil().max(1.0) as usize;
    (0..=n).map(|i| (lo + i as f64 * step).min(hi)).collect::<Vec<_>>()
}

/// Minimal secant quotients near both stable states for the neighbourhood
/// size `delta`.
pub fn secant_minima(spec: &ReactionSpec, eta: f64, delta: f64) -> (f64, f64) {
    const STEP: f64 = 1e-3;
    let s0 = spec.s0();
    let q_under: Vec<f64> = grid_inclusive(0.0, s0 - 2.0 * eta, STEP).into_iter().skip(1).collect();
    let q_over: Vec<f64> = grid_inclusive(0.0, 1.0 - s0 - 2.0 * eta, STEP).into_iter().skip(1).collect();
    let s_grid = grid_inclusive(0.0, delta, STEP);
    let mut mu_under = f64::INFINITY;
    let mut mu_over = f64::INFINITY;
    for &a in &s_grid {
        let (lo, hi) = (a, 1.0 - a);
        let (flo, fhi) = (spec.f(lo), spec.f(hi));
        for &q in &q_under {
            mu_under = mu_under.min((flo - spec.f(lo + q)) / q);
        }
        for &q in &q_over {
            mu_over = mu_over.min((spec.f(hi - q) - fhi) / q);
        }
    }
    (mu_under, mu_over)
}

/// Largest `delta = eta / 2^k` for which both secant minima are positive.
pub fn estimate_secant_constants(spec: &ReactionSpec, eta: f64) -> Result<SecantConstants> {
    let s0 = spec.s0();
    let bound = s0.min(1.0 - s0) / 3.0;
    if !(eta > 0.0 && eta < bound) {
        return Err(Error::InvalidEta { eta, bound });
    }
    let mut delta = eta;
    for _ in 0..40 {
        delta *= 0.5;
        let (mu_under, mu_over) = secant_minima(spec, eta, delta);
        if mu_under > 0.0 && mu_over > 0.0 {
            return Ok(SecantConstants { eta, delta, mu_under, mu_over });
        }
    }
    Err(Error::H4NotSatisfied { eta })
}
