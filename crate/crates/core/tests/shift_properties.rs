use std::sync::OnceLock;

use proptest::prelude::*;
use sharpfront::diagnostics::{convergence_report, estimate_shift, lyapunov_series};
use sharpfront::pde::{simulate, Domain, InitialData, RunPlan, SchemeCtrl, State};
use sharpfront::{ProfileControl, ReactionSpec, StepControl, TravellingWave};

fn wave() -> &'static TravellingWave {
    static W: OnceLock<TravellingWave> = OnceLock::new();
    W.get_or_init(|| {
        let spec = ReactionSpec::holder(0.75, 0.5, 0.5).unwrap();
        TravellingWave::compute(&spec, &StepControl::default(), &ProfileControl::default()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn shift_is_equivariant_under_cell_translation(offset in -3.0f64..3.0, m in -200i64..200) {
        let w = wave();
        let d = Domain::new(-20.0, 20.0, 2000).unwrap();
        let v: Vec<f64> = d.nodes().map(|z| w.profile.eval(z + offset)).collect();
        let n = v.len() as i64;
        let moved: Vec<f64> = (0..n).map(|i| v[(i - m).clamp(0, n - 1) as usize]).collect();
        let a = estimate_shift(&State { t: 0.0, v }, &d, &w.profile).unwrap();
        let b = estimate_shift(&State { t: 0.0, v: moved }, &d, &w.profile).unwrap();
        prop_assert!((b.zeta - a.zeta + m as f64 * d.dz()).abs() < 1e-9, "{} {}", a.zeta, b.zeta);
        prop_assert!((a.zeta - offset).abs() <= d.dz());
    }
}

#[test]
fn level_set_and_least_squares_agree_on_a_converging_run() {
    let spec = ReactionSpec::cubic(0.75).unwrap();
    let w = TravellingWave::compute(&spec, &StepControl::default(), &ProfileControl::default()).unwrap();
    let d = Domain::new(-25.0, 25.0, 2500).unwrap();
    let v0 = InitialData::Step { at: 0.0 }.resolve(&d, None).unwrap();
    let traj = simulate(&spec, w.c(), &d, v0, &SchemeCtrl::default(), RunPlan { t_end: 30.0, snapshot_every: 0.5 }).unwrap();
    let report = convergence_report(&traj, &w.profile, None).unwrap();
    let m = report.shift.samples.len();
    for s in &report.shift.samples[m / 2..] {
        assert!((s.zeta - s.lsq_zeta).abs() <= 2.0 * d.dz(), "t = {}: {} vs {}", s.t, s.zeta, s.lsq_zeta);
        assert_eq!(s.crossings, 1);
    }
    assert!(report.final_sup_dist < 1e-2);
    let interval = (w.profile.z_at(1e-4), w.profile.z_at(1.0 - 1e-4));
    let series = lyapunov_series(&spec, &traj, interval).unwrap();
    assert!(series.is_non_increasing(1e-6));
    assert!(series.samples.iter().skip(1).all(|s| s.dissipation.unwrap() >= 0.0));
}
