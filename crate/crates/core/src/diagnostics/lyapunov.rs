//! The weighted energy `E(v) = ∫ [v_z^2 / 2 - F(v)] e^{cz} dz` along a
//! trajectory, and its dissipation `∫ v_t^2 e^{cz} dz`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pde::{Domain, Trajectory};
use crate::reaction::{Potential, ReactionSpec};

/// Nodes of the Hermite table for `F`.
const POTENTIAL_NODES: usize = 4000;

/// Energy at a snapshot. `dissipation` and `residual` describe the interval
/// from the previous snapshot, with `v_t` from the snapshot difference, so
/// they are absent on the first sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSample {
    pub t: f64,
    pub e: f64,
    pub dissipation: Option<f64>,
    /// `|(E_k - E_{k-1}) / dt + dissipation|`.
    pub residual: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSeries {
    pub interval: (f64, f64),
    pub samples: Vec<LyapunovSample>,
    /// Largest `E(t_{k+1}) - E(t_k)`; non-positive for a decreasing series.
    pub max_increase: f64,
    pub max_dissipation: f64,
    pub max_residual: f64,
}

impl LyapunovSeries {
    /// Monotone within `rel_slack * |E(0)|`.
    pub fn is_non_increasing(&self, rel_slack: f64) -> bool {
        let e0 = self.samples.first().map_or(0.0, |s| s.e.abs());
        self.max_increase <= rel_slack * e0
    }
}

/// Node range `[lo, hi]` inside `[a, b]`.
fn node_range(domain: &Domain, (a, b): (f64, f64)) -> Result<(usize, usize)> {
    let dz = domain.dz();
    let lo = (((a - domain.z_min) / dz).ceil().max(0.0)) as usize;
    let hi = ((((b - domain.z_min) / dz).floor()) as usize).min(domain.n_cells);
    if a >= b || hi < lo + 2 {
        return Err(Error::Config(format!("interval [{a}, {b}] holds fewer than three grid nodes")));
    }
    Ok((lo, hi))
}

/// Gradient part on cell midpoints, potential part by the trapezoid rule.
fn energy(v: &[f64], domain: &Domain, range: (usize, usize), c: f64, pot: &Potential) -> f64 {
    let dz = domain.dz();
    let (lo, hi) = range;
    let mut acc = 0.0;
    for i in lo..hi {
        let zl = domain.z(i);
        let g = (v[i + 1] - v[i]) / dz;
        let grad = 0.5 * g * g * (c * (zl + 0.5 * dz)).exp();
        let pl = pot.eval(v[i]) * (c * zl).exp();
        let pr = pot.eval(v[i + 1]) * (c * (zl + dz)).exp();
        acc += dz * (grad - 0.5 * (pl + pr));
    }
    acc
}

fn weighted_square(w: &[f64], domain: &Domain, range: (usize, usize), c: f64) -> f64 {
    let dz = domain.dz();
    let (lo, hi) = range;
    let term = |i: usize| w[i] * w[i] * (c * domain.z(i)).exp();
    let inner: f64 = (lo + 1..hi).map(term).sum();
    dz * (inner + 0.5 * (term(lo) + term(hi)))
}

/// Energy at every snapshot and dissipation on every snapshot interval,
/// both over `[a, b]`.
pub fn lyapunov_series(spec: &ReactionSpec, traj: &Trajectory, interval: (f64, f64)) -> Result<LyapunovSeries> {
    let states = &traj.states;
    if states.len() < 3 {
        return Err(Error::InsufficientSampling(format!(
            "the energy identity needs at least 3 snapshots, got {}",
            states.len()
        )));
    }
    let domain = &traj.domain;
    let c = traj.c;
    let range = node_range(domain, interval)?;
    let pot = Potential::new(spec, POTENTIAL_NODES)?;
    let energies: Vec<f64> = states.iter().map(|s| energy(&s.v, domain, range, c, &pot)).collect();
    let mut samples = Vec::with_capacity(states.len());
    samples.push(LyapunovSample { t: states[0].t, e: energies[0], dissipation: None, residual: None });
    let mut vt = vec![0.0; domain.len()];
    for k in 1..states.len() {
        let dt = states[k].t - states[k - 1].t;
        for (i, x) in vt.iter_mut().enumerate() {
            *x = (states[k].v[i] - states[k - 1].v[i]) / dt;
        }
        let dissipation = weighted_square(&vt, domain, range, c);
        let residual = ((energies[k] - energies[k - 1]) / dt + dissipation).abs();
        samples.push(LyapunovSample { t: states[k].t, e: energies[k], dissipation: Some(dissipation), residual: Some(residual) });
    }
    let max_increase = energies.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let max_dissipation = samples.iter().filter_map(|s| s.dissipation).fold(0.0, f64::max);
    let max_residual = samples.iter().filter_map(|s| s.residual).fold(0.0, f64::max);
    Ok(LyapunovSeries { interval, samples, max_increase, max_dissipation, max_residual })
}
