//! Position of a front relative to the normalised profile.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::pde::{Domain, State, Trajectory};
use crate::profile::ProfileTable;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftEstimate {
    /// `-z_cross`, so that `v(z) ≈ U(z + zeta)`.
    pub zeta: f64,
    /// Least-squares shift, a cross-check on `zeta`.
    pub lsq_zeta: f64,
    /// Number of crossings of the level `s0`; above 1 means the state is not
    /// yet a single front.
    pub crossings: usize,
}

impl ShiftEstimate {
    pub fn agrees_within(&self, tol: f64) -> bool {
        (self.zeta - self.lsq_zeta).abs() <= tol
    }
}

/// Sup-norm distance between `v` and `U(z + zeta)` over the grid.
pub fn sup_distance(v: &[f64], domain: &Domain, profile: &ProfileTable, zeta: f64) -> f64 {
    Execution::default().max_over(v.len(), |i| (v[i] - profile.eval(domain.z(i) + zeta)).abs())
}

fn crossings(v: &[f64], domain: &Domain, level: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..v.len() - 1 {
        let (a, b) = (v[i] - level, v[i + 1] - level);
        if a == 0.0 {
            out.push(domain.z(i));
        } else if a * b < 0.0 {
            out.push(domain.z(i) + domain.dz() * a / (a - b));
        }
    }
    out
}

/// Point where a unit step would carry the same mass as `v`: the missing
/// mass `∫(1 - v)` to its right equals the excess `∫v` to its left.
fn mass_midpoint(v: &[f64], domain: &Domain) -> f64 {
    let total_one_minus: f64 = v.iter().map(|x| 1.0 - x).sum::<f64>() * domain.dz();
    domain.z_max - total_one_minus
}

/// Golden-section minimisation of `Σ (v_i - U(z_i + zeta))^2` around
/// `guess`. Nodes where `v` sits on a plateau and stays there for every
/// trial shift add nothing, so the sum only runs over the front region.
fn least_squares(v: &[f64], domain: &Domain, profile: &ProfileTable, guess: f64) -> f64 {
    const REACH: f64 = 2.0;
    let dz = domain.dz();
    let inside: Vec<usize> = (0..v.len()).filter(|&i| v[i] > 1e-9 && v[i] < 1.0 - 1e-9).collect();
    let pad = (REACH / dz).ceil() as usize + 1;
    let lo = inside.first().map_or(0, |&i| i.saturating_sub(pad));
    let hi = inside.last().map_or(v.len() - 1, |&i| (i + pad).min(v.len() - 1));
    let cost = |zeta: f64| -> f64 { (lo..=hi).map(|i| (v[i] - profile.eval(domain.z(i) + zeta)).powi(2)).sum() };
    let (mut a, mut b) = (guess - REACH, guess + REACH);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (cost(x1), cost(x2));
    while b - a > 1e-9 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = cost(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = cost(x2);
        }
    }
    0.5 * (a + b)
}

/// Shift of `state` from the `s0` level set, cross-checked by least squares.
pub fn estimate_shift(state: &State, domain: &Domain, profile: &ProfileTable) -> Result<ShiftEstimate> {
    let level = profile.s0;
    let found = crossings(&state.v, domain, level);
    let z_cross = match found.as_slice() {
        [] => return Err(Error::FrontNotInDomain { level }),
        [only] => *only,
        many => {
            let mid = mass_midpoint(&state.v, domain);
            many.iter().copied().min_by(|a, b| (a - mid).abs().total_cmp(&(b - mid).abs())).unwrap()
        }
    };
    let zeta = -z_cross;
    let lsq_zeta = least_squares(&state.v, domain, profile, zeta);
    Ok(ShiftEstimate { zeta, lsq_zeta, crossings: found.len() })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftSample {
    pub t: f64,
    pub zeta: f64,
    pub lsq_zeta: f64,
    pub crossings: usize,
    pub sup_dist: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ShiftTrack {
    pub samples: Vec<ShiftSample>,
}

impl ShiftTrack {
    pub fn last(&self) -> Option<&ShiftSample> {
        self.samples.last()
    }
}

/// Shift and sup-distance at every snapshot.
pub fn track_shift(traj: &Trajectory, profile: &ProfileTable) -> Result<ShiftTrack> {
    let d = &traj.domain;
    let samples = traj
        .states
        .iter()
        .map(|s| {
            let est = estimate_shift(s, d, profile)?;
            Ok(ShiftSample {
                t: s.t,
                zeta: est.zeta,
                lsq_zeta: est.lsq_zeta,
                crossings: est.crossings,
                sup_dist: sup_distance(&s.v, d, profile, est.zeta),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ShiftTrack { samples })
}
