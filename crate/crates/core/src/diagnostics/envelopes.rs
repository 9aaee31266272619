//! Travelling-wave envelopes `v1 <= v <= v2` built from the profile, with
//! every constant fixed by a deterministic rule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::pde::{check_h5, Domain, Trajectory};
use crate::profile::ProfileTable;
use crate::reaction::{estimate_secant_constants, one_sided_lipschitz};
use crate::wave::TravellingWave;

/// Grid for the one-sided Lipschitz constant.
const LIPSCHITZ_GRID: usize = 1000;
/// Sample count for the minimum of `sqrt(y)` over `[delta, 1 - delta]`.
const OMEGA_SAMPLES: usize = 4000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeParams {
    pub eta: f64,
    pub delta: f64,
    pub mu: f64,
    pub nu: f64,
    pub q0_sub: f64,
    pub q0_sup: f64,
    pub xi_inf_sub: f64,
    pub xi_inf_sup: f64,
    pub z_star_sub: f64,
    pub z_star_sup: f64,
    pub omega: f64,
    pub lipschitz: f64,
}

impl EnvelopeParams {
    /// Envelopes identically 0 and 1.
    pub fn trivial() -> Self {
        Self {
            eta: 0.0,
            delta: 0.0,
            mu: 1.0,
            nu: 0.0,
            q0_sub: 1.0,
            q0_sup: 1.0,
            xi_inf_sub: 0.0,
            xi_inf_sup: 0.0,
            z_star_sub: 0.0,
            z_star_sup: 0.0,
            omega: 1.0,
            lipschitz: 0.0,
        }
    }

    /// `(q1(t), q2(t))`.
    pub fn q(&self, t: f64) -> (f64, f64) {
        let decay = (-self.mu * t).exp();
        (self.q0_sub * decay, self.q0_sup * decay)
    }

    /// `(xi1(t), xi2(t))`.
    pub fn xi(&self, t: f64) -> (f64, f64) {
        let (q1, q2) = self.q(t);
        (self.xi_inf_sub - self.nu * q1, self.xi_inf_sup - self.nu * q2)
    }
}

fn midpoint_interval(lo: f64, hi: f64) -> Result<f64> {
    if lo < hi {
        Ok(0.5 * (lo + hi))
    } else {
        Err(Error::EmptyQ0Interval { lo, hi })
    }
}

/// Smallest `s` in `[lo, hi]` with `ok(s)`, for a predicate that is false
/// below some threshold and true above it. Returns `lo` when `ok(lo)`.
fn smallest_feasible(mut lo: f64, mut hi: f64, ok: impl Fn(f64) -> bool) -> f64 {
    if ok(lo) {
        return lo;
    }
    while hi - lo > 1e-10 * (1.0 + hi.abs()) {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Envelope constants for the initial vector `v0` on `domain`.
pub fn build_envelopes(wave: &TravellingWave, domain: &Domain, v0: &[f64], eta: f64) -> Result<EnvelopeParams> {
    let spec = &wave.spec;
    let profile = &wave.profile;
    let s0 = spec.s0();
    let secant = estimate_secant_constants(spec, eta)?;
    let mu = secant.mu();
    let delta = secant.delta;
    let plateaus = check_h5(v0, s0, eta)?;

    let y = &wave.speed.y;
    let omega = (0..=OMEGA_SAMPLES)
        .map(|k| {
            let r = delta + (1.0 - 2.0 * delta) * k as f64 / OMEGA_SAMPLES as f64;
            y.value_at(spec, r).max(0.0).sqrt()
        })
        .fold(f64::INFINITY, f64::min);
    if !(omega > 0.0) {
        return Err(Error::Config(format!("sqrt(y) vanishes inside [{delta}, {}]", 1.0 - delta)));
    }
    let lipschitz = one_sided_lipschitz(spec, LIPSCHITZ_GRID, Execution::default());
    let nu = (1.0 + lipschitz / mu) / omega;

    let q0_sub = midpoint_interval((1.0 - plateaus.right).max(eta), 1.0 - s0 - 2.0 * eta)?;
    let q0_sup = midpoint_interval(plateaus.left.max(eta), s0 - 2.0 * eta)?;

    let z: Vec<f64> = domain.nodes().collect();
    let span = domain.z_max - domain.z_min;
    let below_data = |zs: f64| z.iter().zip(v0).all(|(&x, &v)| profile.eval(x - zs) - q0_sub <= v);
    let above_data = |zs: f64| z.iter().zip(v0).all(|(&x, &v)| (profile.eval(x + zs) + q0_sup).min(1.0) >= v);
    let reach_sub = domain.z_max - profile.z_at(q0_sub);
    let reach_sup = profile.z_at(1.0 - q0_sup) - domain.z_min;
    let z_star_sub = smallest_feasible(-span - reach_sub.abs(), reach_sub.max(0.0) + 1.0, below_data);
    let z_star_sup = smallest_feasible(-span - reach_sup.abs(), reach_sup.max(0.0) + 1.0, above_data);

    Ok(EnvelopeParams {
        eta,
        delta,
        mu,
        nu,
        q0_sub,
        q0_sup,
        xi_inf_sub: nu * q0_sub + z_star_sub,
        xi_inf_sup: nu * q0_sup + z_star_sup,
        z_star_sub,
        z_star_sup,
        omega,
        lipschitz,
    })
}

/// `(v1, v2)` at `(z, t)`.
pub fn eval_envelopes(params: &EnvelopeParams, profile: &ProfileTable, z: f64, t: f64) -> (f64, f64) {
    let (q1, q2) = params.q(t);
    let (xi1, xi2) = params.xi(t);
    let v1 = (profile.eval(z - xi1) - q1).max(0.0);
    let v2 = (profile.eval(z + xi2) + q2).min(1.0);
    (v1, v2)
}

/// Largest `max(v1 - v, v - v2, 0)` over all snapshots and nodes.
pub fn check_comparison(traj: &Trajectory, params: &EnvelopeParams, profile: &ProfileTable) -> f64 {
    let d = &traj.domain;
    traj.states
        .iter()
        .map(|s| {
            Execution::default().max_over(s.v.len(), |i| {
                let (v1, v2) = eval_envelopes(params, profile, d.z(i), s.t);
                (v1 - s.v[i]).max(s.v[i] - v2).max(0.0)
            })
        })
        .fold(0.0, f64::max)
}
