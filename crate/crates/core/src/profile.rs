//! The normalised wave profile `U(z)`, `U(0) = s0`, rebuilt from `y` through
//! `dz = dU / sqrt(y(U))`.
//!
//! Near a stable state where `f` behaves like `g d^a` with `a < 1`, the
//! integral of `1 / sqrt(y)` converges and the profile reaches the state at a
//! finite point. The profile is then constant beyond that point.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::quadrature;
use crate::reaction::{fit_power_law, ReactionSpec};
use crate::wave::{SpeedResult, YSolution};

/// A front endpoint: a finite position or an infinite tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Endpoint {
    Finite(f64),
    Infinite,
}

impl Endpoint {
    pub fn is_finite(self) -> bool {
        matches!(self, Endpoint::Finite(_))
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Endpoint::Finite(v) => Some(v),
            Endpoint::Infinite => None,
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Finite(v) => write!(f, "{v}"),
            Endpoint::Infinite => f.write_str("infinite"),
        }
    }
}

impl Serialize for Endpoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Endpoint::Finite(v) => s.serialize_f64(*v),
            Endpoint::Infinite => s.serialize_str("infinite"),
        }
    }
}

impl<'de> Deserialize<'de> for Endpoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Endpoint::Finite(v)),
            Raw::Text(t) if t == "infinite" => Ok(Endpoint::Infinite),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("expected a number or \"infinite\", got {t:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileControl {
    /// Nodes between `u_lo` and `1 - u_lo`, uniform in `logit(u)`.
    pub u_points: usize,
    /// Innermost node level on infinite sides.
    pub u_lo: f64,
    /// A fitted endpoint exponent of `y` below this value means a finite end.
    pub exponent_threshold: f64,
    /// Dyadic increments of the tail integral must shrink by this ratio.
    pub ratio_threshold: f64,
}

impl Default for ProfileControl {
    fn default() -> Self {
        Self { u_points: 512, u_lo: 1e-3, exponent_threshold: 1.95, ratio_threshold: 0.99 }
    }
}

/// How the profile continues beyond the outermost node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TailModel {
    /// `d(z) = d_node exp(-rate |z - z_node|)` where `d` is the distance to
    /// the stable state.
    Exponential { rate: f64 },
    /// Inverse of `T(d) = A^(-1/2) (d^q / q - (B / 2A) d^(2q) / (2q))`, the
    /// integral of `1 / sqrt(y)` with `y ≈ A d^p (1 + (B / A) d^q)`.
    Power { a: f64, b: f64, q: f64 },
}

impl TailModel {
    fn power_integral(a: f64, b: f64, q: f64, d: f64) -> f64 {
        let dq = d.powf(q);
        (dq / q - b / (2.0 * a) * dq * dq / (2.0 * q)) / a.sqrt()
    }

    /// Distance `d` to the stable state at which the tail integral equals `t`.
    fn invert_power(a: f64, b: f64, q: f64, t: f64, d_hi: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, d_hi);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if Self::power_integral(a, b, q, mid) < t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileTable {
    pub s0: f64,
    pub c_star: f64,
    pub z_nodes: Vec<f64>,
    pub u_values: Vec<f64>,
    /// `dU/dz` at the nodes, after shape-preserving limiting.
    pub slopes: Vec<f64>,
    pub z0: Endpoint,
    pub z1: Endpoint,
    pub left_tail: TailModel,
    pub right_tail: TailModel,
}

fn logit(u: f64) -> f64 {
    (u / (1.0 - u)).ln()
}

fn logistic(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// Leading terms of `y ≈ A d^p (1 + (B/A) d^q)` at one end, for `a < 1`.
/// `sign` is -1 at 0 and +1 at 1.
fn power_coefficients(g: f64, a: f64, c: f64, sign: f64) -> (f64, f64, f64) {
    let big_a = 2.0 * g / (1.0 + a);
    let q = 0.5 * (1.0 - a);
    let big_b = sign * 2.0 * c * big_a.sqrt() / (0.5 * (3.0 + a));
    (big_a, big_b, q)
}

/// Finiteness test of one end from the `y` table. `dist` maps a distance to
/// the stable state to an `r` value.
fn end_is_finite(spec: &ReactionSpec, y: &YSolution, eps: f64, ctrl: &ProfileControl, dist: impl Fn(f64) -> f64) -> bool {
    let d: Vec<f64> = (0..=10).map(|k| eps * 10f64.powf(k as f64 / 10.0)).collect();
    let vals: Vec<f64> = d.iter().map(|&x| y.value_at(spec, dist(x))).collect();
    let Some((p, _)) = fit_power_law(&d, &vals) else {
        return false;
    };
    let inv = |x: f64| {
        let v = y.value_at(spec, dist(x));
        if v > 0.0 {
            1.0 / v.sqrt()
        } else {
            0.0
        }
    };
    let pieces: Vec<f64> = (0..4)
        .map(|k| {
            let lo = eps * 2f64.powi(k);
            (0..8)
                .map(|m| {
                    let a = lo * (1.0 + m as f64 / 8.0);
                    quadrature::gauss_legendre8(inv, a, a + lo / 8.0)
                })
                .sum::<f64>()
        })
        .collect();
    let ratio = pieces.windows(2).map(|w| w[0] / w[1]).fold(0.0, f64::max);
    p < ctrl.exponent_threshold && ratio < ctrl.ratio_threshold
}

/// Builds the profile table from a balanced `y`.
pub fn reconstruct_profile(spec: &ReactionSpec, speed: &SpeedResult, ctrl: &ProfileControl) -> Result<ProfileTable> {
    let y = &speed.y;
    let c = speed.c_star;
    let s0 = spec.s0();
    let n = y.r_grid.len();
    if n < 4 {
        return Err(Error::InsufficientSampling("y table has fewer than 4 nodes".into()));
    }
    for (&r, &v) in y.r_grid.iter().zip(&y.y_values).take(n - 1).skip(1) {
        if !(v > 0.0) {
            return Err(Error::CorruptY { r, y: v });
        }
    }
    if !(ctrl.u_lo > 0.0 && ctrl.u_lo < s0.min(1.0 - s0)) || ctrl.u_points < 8 {
        return Err(Error::Config(format!(
            "profile control needs u_points >= 8 and u_lo in (0, min(s0, 1 - s0)), got {} and {}",
            ctrl.u_points, ctrl.u_lo
        )));
    }
    let eps = y.r_grid[1];
    let finite0 = end_is_finite(spec, y, eps, ctrl, |d| d);
    let finite1 = end_is_finite(spec, y, eps, ctrl, |d| 1.0 - d);

    // Node levels, uniform in logit(u), with s0 as an exact node.
    let spacing = (logit(1.0 - ctrl.u_lo) - logit(ctrl.u_lo)) / (ctrl.u_points - 1) as f64;
    let lo_end = if finite0 { eps } else { ctrl.u_lo };
    let hi_end = if finite1 { 1.0 - eps } else { 1.0 - ctrl.u_lo };
    let side = |from: f64, to: f64| -> Vec<f64> {
        let m = ((to - from).abs() / spacing).ceil().max(1.0) as usize;
        (1..=m).map(|k| logistic(from + (to - from) * k as f64 / m as f64)).collect()
    };
    let t0 = logit(s0);
    let mut u_values: Vec<f64> = side(t0, logit(lo_end)).into_iter().rev().collect();
    *u_values.first_mut().unwrap() = lo_end;
    let k0 = u_values.len();
    u_values.push(s0);
    u_values.extend(side(t0, logit(hi_end)));
    *u_values.last_mut().unwrap() = hi_end;

    let inv_sqrt_y = |r: f64| {
        let v = y.value_at(spec, r);
        1.0 / v.max(f64::MIN_POSITIVE).sqrt()
    };
    let mut z_nodes = vec![0.0; u_values.len()];
    for k in (0..k0).rev() {
        z_nodes[k] = z_nodes[k + 1] - quadrature::gauss_legendre8(inv_sqrt_y, u_values[k], u_values[k + 1]);
    }
    for k in k0 + 1..u_values.len() {
        z_nodes[k] = z_nodes[k - 1] + quadrature::gauss_legendre8(inv_sqrt_y, u_values[k - 1], u_values[k]);
    }
    let raw_slopes: Vec<f64> = u_values.iter().map(|&u| y.value_at(spec, u).sqrt()).collect();
    let slopes = limit_slopes(&z_nodes, &u_values, raw_slopes);

    let (g0, g1) = spec.endpoint_coefficients();
    let first = 0;
    let last = u_values.len() - 1;
    let (z0, left_tail) = if finite0 {
        let (a, b, q) = power_coefficients(g0, spec.alpha0(), c, -1.0);
        let t = TailModel::power_integral(a, b, q, u_values[first]);
        (Endpoint::Finite(z_nodes[first] - t), TailModel::Power { a, b, q })
    } else {
        (Endpoint::Infinite, TailModel::Exponential { rate: slopes[first] / u_values[first] })
    };
    let (z1, right_tail) = if finite1 {
        let (a, b, q) = power_coefficients(g1, spec.alpha1(), c, 1.0);
        let t = TailModel::power_integral(a, b, q, 1.0 - u_values[last]);
        (Endpoint::Finite(z_nodes[last] + t), TailModel::Power { a, b, q })
    } else {
        (Endpoint::Infinite, TailModel::Exponential { rate: slopes[last] / (1.0 - u_values[last]) })
    };

    Ok(ProfileTable { s0, c_star: c, z_nodes, u_values, slopes, z0, z1, left_tail, right_tail })
}

/// Fritsch–Carlson limiting of node slopes so that the Hermite interpolant
/// stays monotone.
fn limit_slopes(z: &[f64], u: &[f64], mut d: Vec<f64>) -> Vec<f64> {
    for k in 0..z.len() - 1 {
        let secant = (u[k + 1] - u[k]) / (z[k + 1] - z[k]);
        if secant <= 0.0 {
            d[k] = 0.0;
            d[k + 1] = 0.0;
            continue;
        }
        let a = d[k] / secant;
        let b = d[k + 1] / secant;
        let s = a * a + b * b;
        if s > 9.0 {
            let tau = 3.0 / s.sqrt();
            d[k] = tau * a * secant;
            d[k + 1] = tau * b * secant;
        }
    }
    d
}

impl ProfileTable {
    /// `U(z)`, with the constant extensions beyond finite endpoints.
    pub fn eval(&self, z: f64) -> f64 {
        let n = self.z_nodes.len();
        let (zf, zl) = (self.z_nodes[0], self.z_nodes[n - 1]);
        if z <= zf {
            let d_node = self.u_values[0];
            return match self.left_tail {
                TailModel::Exponential { rate } => d_node * (rate * (z - zf)).exp(),
                TailModel::Power { a, b, q } => {
                    let t = TailModel::power_integral(a, b, q, d_node) - (zf - z);
                    if t <= 0.0 {
                        0.0
                    } else {
                        TailModel::invert_power(a, b, q, t, d_node)
                    }
                }
            };
        }
        if z >= zl {
            let d_node = 1.0 - self.u_values[n - 1];
            return match self.right_tail {
                TailModel::Exponential { rate } => 1.0 - d_node * (-rate * (z - zl)).exp(),
                TailModel::Power { a, b, q } => {
                    let t = TailModel::power_integral(a, b, q, d_node) - (z - zl);
                    if t <= 0.0 {
                        1.0
                    } else {
                        1.0 - TailModel::invert_power(a, b, q, t, d_node)
                    }
                }
            };
        }
        let j = self.z_nodes.partition_point(|&x| x <= z) - 1;
        let j = j.min(n - 2);
        let (xa, xb) = (self.z_nodes[j], self.z_nodes[j + 1]);
        let h = xb - xa;
        let t = (z - xa) / h;
        let v = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t) * self.u_values[j]
            + t * (1.0 - t) * (1.0 - t) * h * self.slopes[j]
            + t * t * (3.0 - 2.0 * t) * self.u_values[j + 1]
            + t * t * (t - 1.0) * h * self.slopes[j + 1];
        v.clamp(0.0, 1.0)
    }

    /// `z` with `U(z) = u` for `u` in `(0, 1)`, by bisection.
    pub fn z_at(&self, u: f64) -> f64 {
        let n = self.z_nodes.len();
        let mut lo = match self.z0 {
            Endpoint::Finite(v) => v,
            Endpoint::Infinite => match self.left_tail {
                TailModel::Exponential { rate } if u < self.u_values[0] => {
                    return self.z_nodes[0] + (u / self.u_values[0]).ln() / rate;
                }
                _ => self.z_nodes[0],
            },
        };
        let mut hi = match self.z1 {
            Endpoint::Finite(v) => v,
            Endpoint::Infinite => match self.right_tail {
                TailModel::Exponential { rate } if u > self.u_values[n - 1] => {
                    return self.z_nodes[n - 1] - ((1.0 - u) / (1.0 - self.u_values[n - 1])).ln() / rate;
                }
                _ => self.z_nodes[n - 1],
            },
        };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// `z1 - z0` when both ends are finite.
    pub fn front_width(&self) -> Endpoint {
        match (self.z0, self.z1) {
            (Endpoint::Finite(a), Endpoint::Finite(b)) => Endpoint::Finite(b - a),
            _ => Endpoint::Infinite,
        }
    }
}

/// Free-function form of [`ProfileTable::eval`].
pub fn eval_profile(table: &ProfileTable, z: f64) -> f64 {
    table.eval(z)
}

/// Free-function form of [`ProfileTable::front_width`].
pub fn front_width(table: &ProfileTable) -> Endpoint {
    table.front_width()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wave::{solve_speed, StepControl, SPEED_TOL};
    use approx::assert_abs_diff_eq;
    use std::sync::OnceLock;

    fn build(spec: &ReactionSpec, ctrl: &ProfileControl) -> (SpeedResult, ProfileTable) {
        let speed = solve_speed(spec, (0.0, 1.0), SPEED_TOL, &StepControl::default()).unwrap();
        let table = reconstruct_profile(spec, &speed, ctrl).unwrap();
        (speed, table)
    }

    fn cubic_table() -> &'static (ReactionSpec, SpeedResult, ProfileTable) {
        static T: OnceLock<(ReactionSpec, SpeedResult, ProfileTable)> = OnceLock::new();
        T.get_or_init(|| {
            let spec = ReactionSpec::cubic(0.75).unwrap();
            let (s, t) = build(&spec, &ProfileControl::default());
            (spec, s, t)
        })
    }

    fn holder_table() -> &'static (ReactionSpec, SpeedResult, ProfileTable) {
        static T: OnceLock<(ReactionSpec, SpeedResult, ProfileTable)> = OnceLock::new();
        T.get_or_init(|| {
            let spec = ReactionSpec::holder(0.75, 0.5, 0.5).unwrap();
            let (s, t) = build(&spec, &ProfileControl::default());
            (spec, s, t)
        })
    }

    // Logistic closed form for the cubic with s0 = 0.75.
    fn cubic_exact(z: f64) -> f64 {
        1.0 / (1.0 + (-z / 2f64.sqrt()).exp() / 3.0)
    }

    #[test]
    fn cubic_matches_logistic() {
        let (_, _, t) = cubic_table();
        assert_eq!(t.z0, Endpoint::Infinite);
        assert_eq!(t.z1, Endpoint::Infinite);
        assert_eq!(t.front_width(), Endpoint::Infinite);
        assert_eq!(t.eval(0.0), 0.75);
        let z = 2f64.sqrt() * 3f64.ln();
        assert_abs_diff_eq!(t.eval(z), 0.9, epsilon = 1e-6);
        for z in [-30.0, -12.0, -3.0, 1.0, 7.5, 20.0] {
            assert_abs_diff_eq!(t.eval(z), cubic_exact(z), epsilon = 2e-6);
        }
    }

    #[test]
    fn holder_has_finite_ends() {
        let (_, _, t) = holder_table();
        let (Endpoint::Finite(z0), Endpoint::Finite(z1)) = (t.z0, t.z1) else {
            panic!("expected finite ends, got {:?} {:?}", t.z0, t.z1)
        };
        assert!(z0 < t.z_nodes[0] && z1 > *t.z_nodes.last().unwrap());
        assert_eq!(t.eval(z0 - 5.0), 0.0);
        assert_eq!(t.eval(z1 + 5.0), 1.0);
        assert!(t.eval(z0 + 1e-3) > 0.0);
    }

    #[test]
    fn holder_width_is_grid_stable() {
        let (spec, speed, t) = holder_table();
        let fine = ProfileControl { u_points: 1024, ..ProfileControl::default() };
        let t2 = reconstruct_profile(spec, speed, &fine).unwrap();
        let w1 = t.front_width().value().unwrap();
        let w2 = t2.front_width().value().unwrap();
        assert!((w1 - w2).abs() <= 1e-3, "{w1} vs {w2}");
    }

    #[test]
    fn node_structure() {
        for (_, _, t) in [cubic_table(), holder_table()] {
            assert!(t.u_values.windows(2).all(|w| w[1] > w[0]));
            assert!(t.z_nodes.windows(2).all(|w| w[1] > w[0]));
            let k = t.z_nodes.iter().position(|&z| z == 0.0).unwrap();
            assert_eq!(t.u_values[k], t.s0);
            for (z, u) in t.z_nodes.iter().zip(&t.u_values) {
                assert_abs_diff_eq!(t.eval(*z), *u, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn slope_matches_sqrt_y() {
        for (spec, speed, t) in [cubic_table(), holder_table()] {
            let h = 1e-5;
            for u in [0.05, 0.2, 0.5, 0.8, 0.95] {
                let z = t.z_at(u);
                let fd = (t.eval(z + h) - t.eval(z - h)) / (2.0 * h);
                let exact = speed.y.value_at(spec, t.eval(z)).sqrt();
                assert!(((fd - exact) / exact).abs() <= 1e-4, "u = {u}: {fd} vs {exact}");
            }
        }
    }

    #[test]
    fn monotone_on_dense_grid() {
        for (_, _, t) in [cubic_table(), holder_table()] {
            let lo = t.z0.value().unwrap_or(t.z_nodes[0] - 10.0) - 1.0;
            let hi = t.z1.value().unwrap_or(*t.z_nodes.last().unwrap() + 10.0) + 1.0;
            let mut prev = -1.0;
            for i in 0..10_000 {
                let z = lo + (hi - lo) * i as f64 / 9999.0;
                let v = t.eval(z);
                assert!(v >= prev && (0.0..=1.0).contains(&v));
                prev = v;
            }
        }
    }

    #[test]
    fn ode_residual_is_second_order() {
        let (spec, speed, t) = cubic_table();
        let c = speed.c_star;
        let residual = |d: f64| {
            [-4.0, -1.0, 0.5, 2.0, 5.0]
                .iter()
                .map(|&z| {
                    let (um, u0, up) = (t.eval(z - d), t.eval(z), t.eval(z + d));
                    ((up - 2.0 * u0 + um) / (d * d) + c * (up - um) / (2.0 * d) + spec.f(u0)).abs()
                })
                .fold(0.0, f64::max)
        };
        let (r1, r2) = (residual(0.2), residual(0.1));
        assert!(r1 / r2 >= 3.5, "{r1} {r2}");
    }

    #[test]
    fn z_at_inverts_eval() {
        for (_, _, t) in [cubic_table(), holder_table()] {
            for u in [1e-5, 0.01, 0.3, 0.75, 0.99, 1.0 - 1e-5] {
                assert_abs_diff_eq!(t.eval(t.z_at(u)), u, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn corrupt_y_rejected() {
        let (spec, speed, _) = cubic_table();
        let mut bad = speed.clone();
        bad.y.y_values[100] = 0.0;
        let err = reconstruct_profile(spec, &bad, &ProfileControl::default()).unwrap_err();
        assert!(matches!(err, Error::CorruptY { .. }));
    }

    #[test]
    fn endpoint_json() {
        assert_eq!(serde_json::to_string(&Endpoint::Infinite).unwrap(), "\"infinite\"");
        assert_eq!(serde_json::to_string(&Endpoint::Finite(-2.5)).unwrap(), "-2.5");
        let e: Endpoint = serde_json::from_str("\"infinite\"").unwrap();
        assert_eq!(e, Endpoint::Infinite);
    }
}
