//! The wave speed as the unique value of `c` for which
//! `dy/dr = -2 (c sqrt(y+) + f(r))`, `y(0) = y(1) = 0`, has a solution.
//!
//! Here `y(r) = U'(z)^2` seen as a function of `r = U(z)`. Larger speeds
//! push `y` down pointwise, so forward shooting from `r = 0` and bisection on
//! the terminal classification bracket the speed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{self, ProfileControl, ProfileTable};
use crate::quadrature;
use crate::reaction::ReactionSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stepping {
    /// Embedded Dormand–Prince 5(4) with error control between grid nodes.
    Adaptive,
    /// Classical RK4 with one step per grid cell.
    FixedRk4,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    /// Length of the starting interval `[0, eps]` bridged by the Picard start.
    pub start_eps: f64,
    /// Number of uniform output cells on `[0, 1]`.
    pub nodes: usize,
    pub rtol: f64,
    pub atol: f64,
    /// Step size below which a grazing zero is classified by the sign of `f`.
    pub min_step: f64,
    /// `|y(1)|` at or below this value counts as balanced.
    pub balance_tol: f64,
    pub stepping: Stepping,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            start_eps: 1e-4,
            nodes: 2000,
            rtol: 1e-10,
            atol: 1e-14,
            min_step: 1e-12,
            balance_tol: 1e-10,
            stepping: Stepping::Adaptive,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Terminal {
    PositiveAtOne { y1: f64 },
    HitZeroAt { r_bar: f64 },
    Balanced,
}

/// `y` tabulated on an increasing `r` grid starting at 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct YSolution {
    pub c: f64,
    pub r_grid: Vec<f64>,
    pub y_values: Vec<f64>,
    /// Leading coefficient `A` of `y(r) ≈ A r^(1 + alpha0)` at the start.
    pub start_coeff: f64,
    pub terminal: Terminal,
}

impl YSolution {
    fn slope(&self, spec: &ReactionSpec, r: f64, y: f64) -> f64 {
        rhs(spec, self.c, r, y)
    }

    /// Cubic Hermite interpolation with the ODE slopes at the nodes. Returns 0
    /// beyond the end of the grid.
    pub fn value_at(&self, spec: &ReactionSpec, r: f64) -> f64 {
        let g = &self.r_grid;
        let n = g.len();
        if n < 2 || r <= g[0] || r >= g[n - 1] {
            if n > 0 && r == g[n - 1] {
                return self.y_values[n - 1];
            }
            return 0.0;
        }
        let j = g.partition_point(|&x| x <= r) - 1;
        let (xa, xb) = (g[j], g[j + 1]);
        let (ya, yb) = (self.y_values[j], self.y_values[j + 1]);
        let h = xb - xa;
        let u = (r - xa) / h;
        let da = self.slope(spec, xa, ya);
        let db = self.slope(spec, xb, yb);
        let v = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u) * ya
            + u * (1.0 - u) * (1.0 - u) * h * da
            + u * u * (3.0 - 2.0 * u) * yb
            + u * u * (u - 1.0) * h * db;
        v.max(0.0)
    }

    pub fn last(&self) -> f64 {
        *self.y_values.last().unwrap_or(&0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedResult {
    pub c_star: f64,
    pub y: YSolution,
    pub identity_residual: f64,
    pub bisection_iterations: usize,
}

fn rhs(spec: &ReactionSpec, c: f64, r: f64, y: f64) -> f64 {
    -2.0 * (c * y.max(0.0).sqrt() + spec.f(r))
}

// Dormand–Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// One DP5 step; returns the new value and the embedded error estimate.
fn dp5_step(spec: &ReactionSpec, c: f64, r: f64, y: f64, h: f64, k1: f64) -> (f64, f64) {
    let g = |r: f64, y: f64| rhs(spec, c, r, y);
    let k2 = g(r + h / 5.0, y + h * A21 * k1);
    let k3 = g(r + 3.0 * h / 10.0, y + h * (A31 * k1 + A32 * k2));
    let k4 = g(r + 4.0 * h / 5.0, y + h * (A41 * k1 + A42 * k2 + A43 * k3));
    let k5 = g(r + 8.0 * h / 9.0, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
    let k6 = g(r + h, y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
    let y_new = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
    let k7 = g(r + h, y_new);
    let err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
    (y_new, err.abs())
}

fn rk4_step(spec: &ReactionSpec, c: f64, r: f64, y: f64, h: f64) -> f64 {
    let g = |r: f64, y: f64| rhs(spec, c, r, y);
    let k1 = g(r, y);
    let k2 = g(r + h / 2.0, y + h / 2.0 * k1);
    let k3 = g(r + h / 2.0, y + h / 2.0 * k2);
    let k4 = g(r + h, y + h * k3);
    y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Leading coefficient of `y ≈ A r^(1 + alpha0)` near 0: `2 g0 / (1 + alpha0)`
/// when `alpha0 < 1`, otherwise the positive root of `A = g0 - c sqrt(A)`.
pub fn start_coefficient(spec: &ReactionSpec, c: f64) -> f64 {
    let (g0, _) = spec.endpoint_coefficients();
    let a = spec.alpha0();
    if a < 1.0 {
        2.0 * g0 / (1.0 + a)
    } else {
        let root = 0.5 * (-c + (c * c + 4.0 * g0).sqrt());
        root * root
    }
}

/// `y(eps)` from the integral form `y = -2F - 2c ∫ sqrt(y)` closed by the
/// ansatz `y ∝ -2F` on `[0, eps]`. With `P = -2F(eps)` and
/// `D = ∫_0^eps sqrt(-2F)`, `x = sqrt(y(eps))` solves
/// `x^2 + (2cD / sqrt P) x - P = 0`. Exact at leading order for every
/// `alpha0`, and positive for every `c`.
fn start_value(spec: &ReactionSpec, c: f64, eps: f64) -> Result<f64> {
    let p = -2.0 * spec.potential(eps)?;
    if c == 0.0 || p <= 0.0 {
        return Ok(p);
    }
    let tol = (p.sqrt() * eps * 1e-12).max(1e-300);
    let d = quadrature::integrate(
        |s| (-2.0 * spec.potential(s).unwrap_or(0.0)).max(0.0).sqrt(),
        0.0,
        eps,
        tol,
    )?;
    let b = 2.0 * c * d.value / p.sqrt();
    let x = 2.0 * p / (b + (b * b + 4.0 * p).sqrt());
    Ok(x * x)
}

/// Output nodes: 0, then `eps` growing by `sqrt 2` up to the first uniform
/// cell, the uniform nodes `j / n`, and the mirror image of the geometric
/// nodes toward 1. `s0` is always a node.
fn output_grid(spec: &ReactionSpec, ctrl: &StepControl) -> Vec<f64> {
    let n = ctrl.nodes.max(4);
    let h = 1.0 / n as f64;
    let eps = ctrl.start_eps;
    let mut geometric = Vec::new();
    let mut d = eps;
    while d < h * 0.99 {
        geometric.push(d);
        d *= std::f64::consts::SQRT_2;
    }
    let mut g = Vec::with_capacity(n + 2 * geometric.len() + 3);
    g.push(0.0);
    g.extend(geometric.iter().copied());
    for j in 1..n {
        let r = j as f64 * h;
        if r > eps {
            g.push(r);
        }
    }
    let top = g[g.len() - 1];
    g.extend(geometric.iter().rev().map(|d| 1.0 - d).filter(|&r| r > top));
    g.push(1.0);
    let s0 = spec.s0();
    if !g.contains(&s0) && s0 > eps {
        let k = g.partition_point(|&x| x < s0);
        g.insert(k, s0);
    }
    g
}

enum Advance {
    Reached(f64),
    Zero(f64),
}

/// Locates the first zero of the one-step map `h -> step(h)` in `(0, h_hi]`
/// by bisection on the step length.
fn locate_zero<S: Fn(f64) -> f64>(step: S, r: f64, h_hi: f64, min_step: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, h_hi);
    while hi - lo > min_step.max(f64::EPSILON * r.abs().max(1.0)) {
        let mid = 0.5 * (lo + hi);
        if step(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    r + 0.5 * (lo + hi)
}

/// Below `s0` the true `y` stays positive, and it can only be pinned to zero
/// as `r` approaches `s0`. A zero found just below `s0` is that grazing
/// contact; anywhere else with `f <= 0` it is unresolved.
fn classify_zero(spec: &ReactionSpec, r_bar: f64) -> Result<f64> {
    const GRAZE_BAND: f64 = 1e-3;
    if spec.f(r_bar) > 0.0 || (r_bar <= spec.s0() && spec.s0() - r_bar <= GRAZE_BAND) {
        Ok(r_bar)
    } else {
        Err(Error::UnresolvedTangency { r: r_bar })
    }
}

fn advance_adaptive(
    spec: &ReactionSpec,
    c: f64,
    ctrl: &StepControl,
    r0: f64,
    r1: f64,
    y0: f64,
    h_guess: &mut f64,
) -> Result<Advance> {
    let mut r = r0;
    let mut y = y0;
    while r < r1 {
        let mut h = h_guess.min(r1 - r);
        let last = r + h >= r1;
        let k1 = rhs(spec, c, r, y);
        let (y_new, err) = dp5_step(spec, c, r, y, h, k1);
        if y_new < 0.0 {
            let r_bar = locate_zero(|hh| dp5_step(spec, c, r, y, hh, k1).0, r, h, ctrl.min_step);
            if r_bar >= 1.0 {
                return Ok(Advance::Reached(y_new));
            }
            return classify_zero(spec, r_bar).map(Advance::Zero);
        }
        let scale = ctrl.atol + ctrl.rtol * y.abs().max(y_new.abs());
        let ratio = err / scale;
        if ratio > 1.0 && h <= ctrl.min_step {
            return classify_zero(spec, r).map(Advance::Zero);
        }
        if ratio <= 1.0 {
            r = if last { r1 } else { r + h };
            y = y_new;
            let grow = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
            if !last {
                *h_guess = h * grow;
            } else {
                *h_guess = h_guess.max(h * grow);
            }
        } else {
            h *= (0.9 * ratio.powf(-0.2)).clamp(0.1, 0.9);
            if h < ctrl.min_step {
                h = ctrl.min_step;
            }
            *h_guess = h;
        }
    }
    Ok(Advance::Reached(y))
}

fn advance_rk4(spec: &ReactionSpec, c: f64, ctrl: &StepControl, r0: f64, r1: f64, y0: f64) -> Result<Advance> {
    let h = r1 - r0;
    let y_new = rk4_step(spec, c, r0, y0, h);
    if y_new < 0.0 {
        let r_bar = locate_zero(|hh| rk4_step(spec, c, r0, y0, hh), r0, h, ctrl.min_step);
        if r_bar >= 1.0 {
            return Ok(Advance::Reached(y_new));
        }
        return classify_zero(spec, r_bar).map(Advance::Zero);
    }
    Ok(Advance::Reached(y_new))
}

/// Shoots `y` forward from `r = 0` at speed `c`.
pub fn integrate_y(spec: &ReactionSpec, c: f64, ctrl: &StepControl) -> Result<YSolution> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::Config(format!("speed must be finite and non-negative, got {c}")));
    }
    if !(ctrl.start_eps > 0.0 && ctrl.start_eps < spec.s0()) {
        return Err(Error::Config(format!("start_eps must lie in (0, s0), got {}", ctrl.start_eps)));
    }
    let grid = output_grid(spec, ctrl);
    let mut r_grid = Vec::with_capacity(grid.len());
    let mut y_values = Vec::with_capacity(grid.len());
    r_grid.push(0.0);
    y_values.push(0.0);
    let mut y = start_value(spec, c, ctrl.start_eps)?;
    r_grid.push(ctrl.start_eps);
    y_values.push(y);
    let mut h_guess = ctrl.start_eps;
    let mut terminal = None;
    for w in grid[1..].windows(2) {
        let (r0, r1) = (w[0], w[1]);
        let step = match ctrl.stepping {
            Stepping::Adaptive => advance_adaptive(spec, c, ctrl, r0, r1, y, &mut h_guess)?,
            Stepping::FixedRk4 => advance_rk4(spec, c, ctrl, r0, r1, y)?,
        };
        match step {
            Advance::Reached(v) => {
                y = v;
                r_grid.push(r1);
                y_values.push(v.max(0.0));
            }
            Advance::Zero(r_bar) => {
                if r_bar > r0 {
                    r_grid.push(r_bar);
                    y_values.push(0.0);
                } else {
                    *y_values.last_mut().unwrap() = 0.0;
                }
                terminal = Some(Terminal::HitZeroAt { r_bar });
                break;
            }
        }
    }
    let terminal = terminal.unwrap_or(if y.abs() <= ctrl.balance_tol {
        Terminal::Balanced
    } else if y > 0.0 {
        Terminal::PositiveAtOne { y1: y }
    } else {
        Terminal::HitZeroAt { r_bar: 1.0 }
    });
    Ok(YSolution { c, r_grid, y_values, start_coeff: start_coefficient(spec, c), terminal })
}

/// `|c ∫_0^1 sqrt(y) dr + F(1)|`, from the tabulated `y`.
pub fn identity_residual(spec: &ReactionSpec, y: &YSolution) -> Result<f64> {
    let roots: Vec<f64> = y.y_values.iter().map(|v| v.max(0.0).sqrt()).collect();
    let integral = quadrature::simpson_nonuniform(&y.r_grid, &roots);
    Ok((y.c * integral + spec.potential(1.0)?).abs())
}

/// Recomputes the identity residual of a finished speed computation.
pub fn verify_speed_identity(spec: &ReactionSpec, result: &SpeedResult) -> Result<f64> {
    identity_residual(spec, &result.y)
}

/// Bisection for the unique speed. `bracket` is a hint; a failing lower end
/// falls back to `c = 0` and a failing upper end is doubled until `y` hits zero.
pub fn solve_speed(spec: &ReactionSpec, bracket: (f64, f64), tol: f64, ctrl: &StepControl) -> Result<SpeedResult> {
    let f1 = spec.potential(1.0)?;
    if f1 >= 0.0 {
        return Err(Error::NoPositiveSpeed { f1 });
    }
    if !(tol > 0.0) {
        return Err(Error::Config(format!("bisection tolerance must be positive, got {tol}")));
    }
    let finish = |sol: YSolution, iterations: usize| -> Result<SpeedResult> {
        let mut sol = sol;
        if let Some(last) = sol.y_values.last_mut() {
            *last = 0.0;
        }
        sol.terminal = Terminal::Balanced;
        let identity_residual = identity_residual(spec, &sol)?;
        Ok(SpeedResult { c_star: sol.c, y: sol, identity_residual, bisection_iterations: iterations })
    };

    let (mut c_lo, mut c_hi) = bracket;
    if !(c_lo >= 0.0 && c_lo.is_finite()) {
        c_lo = 0.0;
    }
    let mut lo = integrate_y(spec, c_lo, ctrl)?;
    match lo.terminal {
        Terminal::Balanced => return finish(lo, 0),
        Terminal::PositiveAtOne { .. } => {}
        Terminal::HitZeroAt { .. } => {
            c_lo = 0.0;
            lo = integrate_y(spec, 0.0, ctrl)?;
            if !matches!(lo.terminal, Terminal::PositiveAtOne { .. }) {
                return Err(Error::BracketFailure(format!("y does not stay positive at c = 0 (F(1) = {f1})")));
            }
        }
    }
    if !(c_hi > c_lo && c_hi.is_finite()) {
        c_hi = c_lo + 1.0;
    }
    let mut doublings = 0;
    loop {
        let hi = match integrate_y(spec, c_hi, ctrl) {
            Err(Error::UnresolvedTangency { .. }) => break,
            other => other?,
        };
        match hi.terminal {
            Terminal::HitZeroAt { .. } => break,
            Terminal::Balanced => return finish(hi, 0),
            Terminal::PositiveAtOne { .. } => {
                c_lo = c_hi;
                lo = hi;
                c_hi *= 2.0;
                doublings += 1;
                if doublings > 60 {
                    return Err(Error::BracketFailure(format!("y stays positive up to c = {c_hi}")));
                }
            }
        }
    }

    let mut iterations = 0;
    while iterations < 200 {
        let balanced = lo.last().abs() <= ctrl.balance_tol;
        if c_hi - c_lo <= tol && balanced {
            break;
        }
        let mid = 0.5 * (c_lo + c_hi);
        if mid <= c_lo || mid >= c_hi {
            break;
        }
        iterations += 1;
        // y can only touch zero when c is at least the wave speed, so a
        // grazing zero also lowers the upper end.
        match integrate_y(spec, mid, ctrl) {
            Ok(sol) => match sol.terminal {
                Terminal::HitZeroAt { .. } => c_hi = mid,
                Terminal::PositiveAtOne { .. } | Terminal::Balanced => {
                    c_lo = mid;
                    lo = sol;
                }
            },
            Err(Error::UnresolvedTangency { .. }) => c_hi = mid,
            Err(e) => return Err(e),
        }
    }
    if lo.last().abs() > ctrl.balance_tol.max(1e3 * f64::EPSILON) && c_hi - c_lo > tol {
        return Err(Error::BracketFailure(format!(
            "bisection stalled on [{c_lo}, {c_hi}] with y(1) = {}",
            lo.last()
        )));
    }
    finish(lo, iterations)
}

/// Speed, `y` and the normalised profile of one reaction term.
#[derive(Clone, Debug)]
pub struct TravellingWave {
    pub spec: ReactionSpec,
    pub speed: SpeedResult,
    pub profile: ProfileTable,
}

/// Default bisection tolerance on `c`.
pub const SPEED_TOL: f64 = 1e-8;

impl TravellingWave {
    pub fn compute(spec: &ReactionSpec, ctrl: &StepControl, profile_ctrl: &ProfileControl) -> Result<Self> {
        let speed = solve_speed(spec, (0.0, 1.0), SPEED_TOL, ctrl)?;
        let profile = profile::reconstruct_profile(spec, &speed, profile_ctrl)?;
        Ok(Self { spec: spec.clone(), speed, profile })
    }

    pub fn c(&self) -> f64 {
        self.speed.c_star
    }
}
