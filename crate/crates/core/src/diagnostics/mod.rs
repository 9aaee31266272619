//! Checks that a simulated trajectory behaves like the theory predicts:
//! envelopes, energy decay, shift convergence and stability.

pub mod envelopes;
pub mod lyapunov;
pub mod shift;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::pde::{simulate, Domain, InitialData, RunPlan, SchemeCtrl, Trajectory};
use crate::profile::{Endpoint, ProfileTable};
use crate::reaction::ReactionSpec;
use crate::wave::TravellingWave;

pub use envelopes::{build_envelopes, check_comparison, eval_envelopes, EnvelopeParams};
pub use lyapunov::{lyapunov_series, LyapunovSample, LyapunovSeries};
pub use shift::{estimate_shift, sup_distance, track_shift, ShiftEstimate, ShiftSample, ShiftTrack};

/// Level cut used for infinite tails when choosing the energy interval.
pub const TAIL_LEVEL: f64 = 1e-4;

/// Energy interval: `[z0 - xi_sup - 1, z1 + xi_sub + 1]` for finite ends,
/// where `TAIL_LEVEL < U < 1 - TAIL_LEVEL` otherwise. Clipped to the domain.
pub fn default_interval(profile: &ProfileTable, params: Option<&EnvelopeParams>, domain: &Domain) -> (f64, f64) {
    let (xi_sup, xi_sub) = params.map_or((0.0, 0.0), |p| (p.xi_inf_sup.max(0.0), p.xi_inf_sub.max(0.0)));
    let a = match profile.z0 {
        Endpoint::Finite(z0) => z0 - xi_sup - 1.0,
        Endpoint::Infinite => profile.z_at(TAIL_LEVEL),
    };
    let b = match profile.z1 {
        Endpoint::Finite(z1) => z1 + xi_sub + 1.0,
        Endpoint::Infinite => profile.z_at(1.0 - TAIL_LEVEL),
    };
    (a.max(domain.z_min), b.min(domain.z_max))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub zeta_inf: f64,
    pub final_sup_dist: f64,
    /// Largest `|zeta(t) - zeta_inf|` over the final third of the run.
    pub zeta_spread: f64,
    /// `sup_dist` non-increasing over the final half, up to `1e-4`.
    pub monotone_tail: bool,
    pub lyapunov_ok: Option<bool>,
    pub stability_constant_estimate: Option<f64>,
    pub shift: ShiftTrack,
}

/// Minimum number of snapshots for a report.
pub const MIN_REPORT_SAMPLES: usize = 10;
const MONOTONE_SLACK: f64 = 1e-4;
const LYAPUNOV_SLACK: f64 = 1e-6;

/// Summary of how close the end of a run is to a shifted profile. The
/// energy check runs when `spec` and an interval are given.
pub fn convergence_report(
    traj: &Trajectory,
    profile: &ProfileTable,
    energy: Option<(&ReactionSpec, (f64, f64))>,
) -> Result<ConvergenceReport> {
    if traj.states.len() < MIN_REPORT_SAMPLES {
        return Err(Error::InsufficientSampling(format!(
            "a convergence report needs at least {MIN_REPORT_SAMPLES} snapshots, got {}",
            traj.states.len()
        )));
    }
    let shift = track_shift(traj, profile)?;
    let samples = &shift.samples;
    let last = samples.last().unwrap();
    let m = samples.len();
    let zeta_spread = samples[m - m / 3..].iter().map(|s| (s.zeta - last.zeta).abs()).fold(0.0, f64::max);
    let monotone_tail = samples[m / 2..].windows(2).all(|w| w[1].sup_dist <= w[0].sup_dist + MONOTONE_SLACK);
    let lyapunov_ok = match energy {
        Some((spec, interval)) => Some(lyapunov_series(spec, traj, interval)?.is_non_increasing(LYAPUNOV_SLACK)),
        None => None,
    };
    Ok(ConvergenceReport {
        zeta_inf: last.zeta,
        final_sup_dist: last.sup_dist,
        zeta_spread,
        monotone_tail,
        lyapunov_ok,
        stability_constant_estimate: None,
        shift,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeEntry {
    pub epsilon: f64,
    /// Largest `|v(z, t) - U(z)|` over the run.
    pub max_sup_dist: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityProbe {
    pub entries: Vec<ProbeEntry>,
    /// Largest ratio, the measured `C'`.
    pub c_prime: f64,
    /// Largest ratio over the smallest.
    pub spread: f64,
}

/// Default perturbation sizes.
pub const PROBE_EPSILONS: [f64; 3] = [0.01, 0.02, 0.05];

/// Runs perturbations `U + epsilon * bump` and measures how far the solution
/// strays from `U`, relative to `epsilon`. Runs are independent and spread
/// over `exec`.
pub fn stability_probe(
    wave: &TravellingWave,
    domain: &Domain,
    ctrl: &SchemeCtrl,
    plan: RunPlan,
    epsilons: &[f64],
    exec: Execution,
) -> Result<StabilityProbe> {
    let inner = SchemeCtrl { execution: Execution::Sequential, ..*ctrl };
    let ctrl = if exec.is_parallel() { &inner } else { ctrl };
    let results = exec.map(epsilons, |&epsilon| -> Result<ProbeEntry> {
        let data = InitialData::ProfilePerturbation { epsilon, shift: 0.0 };
        let v0 = data.resolve(domain, Some(&wave.profile))?;
        let traj = simulate(&wave.spec, wave.c(), domain, v0, ctrl, plan)?;
        let max_sup_dist = traj
            .states
            .iter()
            .map(|s| sup_distance(&s.v, domain, &wave.profile, 0.0))
            .fold(0.0, f64::max);
        Ok(ProbeEntry { epsilon, max_sup_dist, ratio: max_sup_dist / epsilon })
    });
    let entries = results.into_iter().collect::<Result<Vec<_>>>()?;
    let c_prime = entries.iter().map(|e| e.ratio).fold(0.0, f64::max);
    let low = entries.iter().map(|e| e.ratio).fold(f64::INFINITY, f64::min);
    Ok(StabilityProbe { entries, c_prime, spread: c_prime / low })
}
