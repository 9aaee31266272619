//! Strang splitting around the exact linear flow: the drift-shifted heat
//! kernel applied as a discrete convolution.

use super::{protected_euler, Domain, SchemeCtrl};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::reaction::ReactionSpec;

#[derive(Clone, Debug)]
pub struct SplittingStepper {
    spec: ReactionSpec,
    dt: f64,
    exec: Execution,
    offset: isize,
    weights: Vec<f64>,
    scratch: Vec<f64>,
}

/// Normalised weights `w_m ∝ exp(-(m dz - c dt)^2 / (4 dt))` for
/// `m = offset, ..., offset + len - 1`, cut where `|m dz - c dt|` exceeds
/// `sigmas * sqrt(2 dt)`.
pub fn kernel_weights(dz: f64, c: f64, dt: f64, sigmas: f64) -> (isize, Vec<f64>) {
    let centre = c * dt;
    let reach = sigmas * (2.0 * dt).sqrt();
    let lo = ((centre - reach) / dz).ceil() as isize;
    let hi = ((centre + reach) / dz).floor() as isize;
    let mut w: Vec<f64> = (lo..=hi)
        .map(|m| {
            let x = m as f64 * dz - centre;
            (-x * x / (4.0 * dt)).exp()
        })
        .collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    (lo, w)
}

/// `out[i] = Σ_m w_m v[i + m]`, with `v` extended by its end values.
pub fn convolve(v: &[f64], offset: isize, weights: &[f64], out: &mut [f64], exec: Execution) {
    let n = v.len() as isize;
    let len = weights.len() as isize;
    exec.fill(out, |i| {
        let i = i as isize;
        let start = i + offset;
        if start >= 0 && start + len <= n {
            let window = &v[start as usize..(start + len) as usize];
            window.iter().zip(weights).map(|(a, b)| a * b).sum()
        } else {
            weights
                .iter()
                .enumerate()
                .map(|(k, w)| w * v[(start + k as isize).clamp(0, n - 1) as usize])
                .sum()
        }
    });
}

impl SplittingStepper {
    pub fn new(spec: &ReactionSpec, c: f64, domain: &Domain, ctrl: &SchemeCtrl) -> Result<Self> {
        let (offset, weights) = kernel_weights(domain.dz(), c, ctrl.dt, ctrl.kernel_cutoff_sigmas);
        let reach = offset.unsigned_abs().max((offset + weights.len() as isize).unsigned_abs());
        if 2 * reach >= domain.n_cells {
            return Err(Error::Config(format!(
                "kernel support of {reach} cells exceeds half the domain ({} cells)",
                domain.n_cells
            )));
        }
        Ok(Self {
            spec: spec.clone(),
            dt: ctrl.dt,
            exec: ctrl.execution,
            offset,
            weights,
            scratch: vec![0.0; domain.n_cells + 1],
        })
    }

    /// Second-order strong-stability-preserving Runge–Kutta built from two
    /// protected Euler stages, so the substep stays monotone.
    fn reaction(&self, v: &mut [f64], h: f64) {
        let spec = &self.spec;
        self.exec.update(v, |x| {
            let stage = protected_euler(spec, protected_euler(spec, x, h), h);
            0.5 * (x + stage)
        });
    }

    pub fn step(&mut self, v: &mut [f64]) {
        let n = v.len();
        let (left, right) = (v[0], v[n - 1]);
        let half = 0.5 * self.dt;
        self.reaction(v, half);
        convolve(v, self.offset, &self.weights, &mut self.scratch, self.exec);
        v.copy_from_slice(&self.scratch);
        self.reaction(v, half);
        v[0] = left;
        v[n - 1] = right;
    }

    pub fn kernel(&self) -> (isize, &[f64]) {
        (self.offset, &self.weights)
    }
}
