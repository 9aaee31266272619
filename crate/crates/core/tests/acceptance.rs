//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero on any FAIL.

use std::f64::consts::{PI, SQRT_2};
use std::process::ExitCode;
use std::time::Instant;

use sharpfront::diagnostics::{
    build_envelopes, check_comparison, convergence_report, default_interval, lyapunov_series, stability_probe,
    sup_distance, PROBE_EPSILONS,
};
use sharpfront::pde::{simulate, Domain, InitialData, RunPlan, Scheme, SchemeCtrl, Trajectory};
use sharpfront::profile::reconstruct_profile;
use sharpfront::wave::{integrate_y, solve_speed, SPEED_TOL};
use sharpfront::{Endpoint, Execution, ProfileControl, ReactionSpec, StepControl, TravellingWave};

type Check = Result<(bool, String), String>;

fn cubic(s0: f64) -> ReactionSpec {
    ReactionSpec::cubic(s0).unwrap()
}

fn holder() -> ReactionSpec {
    ReactionSpec::holder(0.75, 0.5, 0.5).unwrap()
}

fn wave(spec: &ReactionSpec) -> Result<TravellingWave, String> {
    TravellingWave::compute(spec, &StepControl::default(), &ProfileControl::default()).map_err(|e| e.to_string())
}

fn cubic_potential(s0: f64, r: f64) -> f64 {
    -s0 * r * r / 2.0 + (1.0 + s0) * r.powi(3) / 3.0 - r.powi(4) / 4.0
}

fn cubic_profile(z: f64) -> f64 {
    1.0 / (1.0 + (-z / SQRT_2).exp() / 3.0)
}

/// `∫_0^1 g` by 4-point Gauss-Legendre on `panels` equal panels.
fn gauss4(g: impl Fn(f64) -> f64, panels: usize) -> f64 {
    let a = (3.0 / 7.0 - 2.0 / 7.0 * (6.0f64 / 5.0).sqrt()).sqrt();
    let b = (3.0 / 7.0 + 2.0 / 7.0 * (6.0f64 / 5.0).sqrt()).sqrt();
    let wa = (18.0 + 30f64.sqrt()) / 36.0;
    let wb = (18.0 - 30f64.sqrt()) / 36.0;
    let h = 1.0 / panels as f64;
    (0..panels)
        .map(|k| {
            let m = (k as f64 + 0.5) * h;
            let half = 0.5 * h;
            half * (wa * (g(m - half * a) + g(m + half * a)) + wb * (g(m - half * b) + g(m + half * b)))
        })
        .sum()
}

fn run(
    spec: &ReactionSpec,
    c: f64,
    domain: &Domain,
    v0: Vec<f64>,
    ctrl: &SchemeCtrl,
    plan: RunPlan,
) -> Result<Trajectory, String> {
    simulate(spec, c, domain, v0, ctrl, plan).map_err(|e| e.to_string())
}

fn ctrl(dt: f64) -> SchemeCtrl {
    SchemeCtrl { dt, ..Default::default() }
}

fn speed_oracle() -> Check {
    let mut ok = true;
    let mut notes = Vec::new();
    for s0 in [0.75, 0.9] {
        let start = Instant::now();
        let res = solve_speed(&cubic(s0), (0.0, 1.0), SPEED_TOL, &StepControl::default()).map_err(|e| e.to_string())?;
        let secs = start.elapsed().as_secs_f64();
        let exact = (2.0 * s0 - 1.0) / SQRT_2;
        let err = (res.c_star - exact).abs();
        ok &= err <= 1e-6 && secs < 1.0;
        notes.push(format!("s0={s0}: c*={:.10} err={err:.1e} {secs:.2}s", res.c_star));
    }
    Ok((ok, notes.join("; ")))
}

fn first_integral() -> Check {
    let mut residuals = Vec::new();
    for (spec, f1) in [(cubic(0.75), cubic_potential(0.75, 1.0)), (holder(), -PI / 32.0)] {
        let w = wave(&spec)?;
        let y = &w.speed.y;
        let integral = gauss4(|r| y.value_at(&spec, r).max(0.0).sqrt(), 4000);
        residuals.push((w.c() * integral + f1).abs());
    }
    let ok = residuals[0] <= 1e-8 && residuals[1] <= 1e-4;
    Ok((ok, format!("cubic |c∫√y - 1/24|={:.1e}; holder |c∫√y - π/32|={:.1e}", residuals[0], residuals[1])))
}

fn y_oracle() -> Check {
    let spec = cubic(0.75);
    let c = wave(&spec)?;
    let at_half = c.speed.y.value_at(&spec, 0.5);
    let err = (at_half - 0.03125).abs();
    let y0 = integrate_y(&spec, 0.0, &StepControl::default()).map_err(|e| e.to_string())?;
    let dev = y0
        .r_grid
        .iter()
        .zip(&y0.y_values)
        .map(|(&r, &y)| (y + 2.0 * cubic_potential(0.75, r)).abs())
        .fold(0.0, f64::max);
    Ok((err <= 1e-8 && dev <= 1e-8, format!("|y(0.5) - 1/32|={err:.1e}; c=0: max|y+2F|={dev:.1e}")))
}

fn profile_oracle() -> Check {
    let spec = cubic(0.75);
    let w = wave(&spec)?;
    let t = &w.profile;
    let at = t.eval(SQRT_2 * 3f64.ln());
    let err = (at - 0.9).abs();
    let shape = [-30.0, -5.0, 0.0, 3.0, 25.0].iter().map(|&z| (t.eval(z) - cubic_profile(z)).abs()).fold(0.0, f64::max);
    let c = w.c();
    let residual = |d: f64| {
        let n = 200;
        (0..=n)
            .map(|k| {
                let z = -6.0 + 12.0 * k as f64 / n as f64;
                let (um, u0, up) = (t.eval(z - d), t.eval(z), t.eval(z + d));
                ((up - 2.0 * u0 + um) / (d * d) + c * (up - um) / (2.0 * d) + spec.f(u0)).abs()
            })
            .fold(0.0, f64::max)
    };
    let (r1, r2) = (residual(0.2), residual(0.1));
    let ratio = r1 / r2;
    let ok = err <= 1e-6 && t.eval(0.0) == 0.75 && ratio >= 3.5;
    Ok((ok, format!("|U(√2 ln 3) - 0.9|={err:.1e}; max|U - logistic|={shape:.1e}; residual ratio {ratio:.2}")))
}

fn sharp_fronts() -> Check {
    let start = Instant::now();
    let spec = holder();
    let mut widths = Vec::new();
    for k in 0..3 {
        let step = StepControl { nodes: 2000 << k, ..StepControl::default() };
        let pctrl = ProfileControl { u_points: 512 << k, ..ProfileControl::default() };
        let speed = solve_speed(&spec, (0.0, 1.0), SPEED_TOL, &step).map_err(|e| e.to_string())?;
        let t = reconstruct_profile(&spec, &speed, &pctrl).map_err(|e| e.to_string())?;
        match (t.z0, t.z1, t.front_width()) {
            (Endpoint::Finite(_), Endpoint::Finite(_), Endpoint::Finite(w)) => widths.push(w),
            other => return Ok((false, format!("holder ends not finite: {other:?}"))),
        }
    }
    let holder_secs = start.elapsed().as_secs_f64();
    let spread = widths.windows(2).map(|w| (w[0] - w[1]).abs()).fold(0.0, f64::max);
    let c = wave(&cubic(0.75))?;
    let cubic_infinite = c.profile.z0 == Endpoint::Infinite && c.profile.z1 == Endpoint::Infinite;
    let ok = spread <= 1e-3 && cubic_infinite && holder_secs < 5.0;
    Ok((
        ok,
        format!(
            "holder widths {:.6}/{:.6}/{:.6} spread {spread:.1e} in {holder_secs:.2}s; cubic ends infinite: {cubic_infinite}",
            widths[0], widths[1], widths[2]
        ),
    ))
}

fn stationarity() -> Check {
    let spec = cubic(0.75);
    let w = wave(&spec)?;
    let mut drifts = Vec::new();
    for (n, dt) in [(6000, 0.002), (12000, 0.001)] {
        let d = Domain::new(-30.0, 30.0, n).map_err(|e| e.to_string())?;
        let v0 = InitialData::ProfilePerturbation { epsilon: 0.0, shift: 0.0 }
            .resolve(&d, Some(&w.profile))
            .map_err(|e| e.to_string())?;
        let traj = run(&spec, w.c(), &d, v0, &ctrl(dt), RunPlan { t_end: 10.0, snapshot_every: 0.5 })?;
        let drift = traj.states.iter().map(|s| sup_distance(&s.v, &d, &w.profile, 0.0)).fold(0.0, f64::max);
        drifts.push(drift);
    }
    let ok = drifts[0] <= 5e-3 && drifts[1] <= 2.5e-3;
    Ok((ok, format!("sup drift {:.2e} (dz 0.01), {:.2e} (dz 0.005)", drifts[0], drifts[1])))
}

fn cross_validation() -> Check {
    let spec = cubic(0.75);
    let w = wave(&spec)?;
    let d = Domain::new(-30.0, 30.0, 6000).map_err(|e| e.to_string())?;
    let v0 = InitialData::Step { at: 0.0 }.resolve(&d, None).map_err(|e| e.to_string())?;
    let plan = RunPlan { t_end: 10.0, snapshot_every: 10.0 };
    let imex = run(&spec, w.c(), &d, v0.clone(), &ctrl(0.002), plan)?;
    let split_ctrl = SchemeCtrl { scheme: Scheme::SplittingGreen, ..ctrl(0.002) };
    let split = run(&spec, w.c(), &d, v0, &split_ctrl, plan)?;
    let (a, b) = (&imex.last().unwrap().v, &split.last().unwrap().v);
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok((diff <= 5e-3, format!("sup |imex - splitting| at t=10: {diff:.2e}")))
}

fn comparison() -> Check {
    let d = Domain::new(-40.0, 40.0, 8000).map_err(|e| e.to_string())?;
    let plan = RunPlan { t_end: 60.0, snapshot_every: 0.5 };
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, spec) in [("cubic", cubic(0.75)), ("holder", holder())] {
        let w = wave(&spec)?;
        let eta = spec.s0().min(1.0 - spec.s0()) / 6.0;
        let upper = InitialData::Step { at: 0.0 }.resolve(&d, None).map_err(|e| e.to_string())?;
        let lower = InitialData::Step { at: 2.0 }.resolve(&d, None).map_err(|e| e.to_string())?;
        let params = build_envelopes(&w, &d, &upper, eta).map_err(|e| e.to_string())?;
        let a = run(&spec, w.c(), &d, upper, &ctrl(0.002), plan)?;
        let b = run(&spec, w.c(), &d, lower, &ctrl(0.002), plan)?;
        let violation = check_comparison(&a, &params, &w.profile);
        let disorder = a
            .states
            .iter()
            .zip(&b.states)
            .map(|(sa, sb)| sb.v.iter().zip(&sa.v).map(|(l, u)| l - u).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        ok &= violation <= 1e-8 && disorder <= 1e-10;
        notes.push(format!("{name}: envelope violation {violation:.1e}, order violation {disorder:.1e}"));
    }
    Ok((ok, notes.join("; ")))
}

fn lyapunov() -> Check {
    let mut ok = true;
    let mut notes = Vec::new();
    let d = Domain::new(-40.0, 40.0, 8000).map_err(|e| e.to_string())?;
    for (name, spec) in [("cubic", cubic(0.75)), ("holder", holder())] {
        let w = wave(&spec)?;
        let v0 = InitialData::Step { at: 0.0 }.resolve(&d, None).map_err(|e| e.to_string())?;
        let traj = run(&spec, w.c(), &d, v0, &ctrl(0.002), RunPlan { t_end: 60.0, snapshot_every: 0.5 })?;
        let interval = default_interval(&w.profile, None, &d);
        let series = lyapunov_series(&spec, &traj, interval).map_err(|e| e.to_string())?;
        let e0 = series.samples[0].e.abs();
        ok &= series.is_non_increasing(1e-6);
        notes.push(format!("{name}: max increase {:.1e} (|E0| {e0:.3})", series.max_increase));
    }
    let spec = cubic(0.75);
    let w = wave(&spec)?;
    let fine = Domain::new(-30.0, 30.0, 12000).map_err(|e| e.to_string())?;
    let v0 = InitialData::SmoothedStep { at: 0.0, width: 1.0, left: 0.0, right: 1.0 }
        .resolve(&fine, None)
        .map_err(|e| e.to_string())?;
    let traj = run(&spec, w.c(), &fine, v0, &ctrl(0.001), RunPlan { t_end: 10.0, snapshot_every: 0.05 })?;
    let interval = default_interval(&w.profile, None, &fine);
    let series = lyapunov_series(&spec, &traj, interval).map_err(|e| e.to_string())?;
    let rel = series.max_residual / series.max_dissipation;
    ok &= rel <= 5e-3 && series.is_non_increasing(1e-6);
    notes.push(format!("identity residual / max dissipation {rel:.1e}"));
    Ok((ok, notes.join("; ")))
}

fn end_to_end() -> Check {
    let d = Domain::new(-40.0, 40.0, 8000).map_err(|e| e.to_string())?;
    let plan = RunPlan { t_end: 60.0, snapshot_every: 0.5 };
    let ctrl = ctrl(0.002);
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, spec) in [("cubic", cubic(0.75)), ("holder", holder())] {
        let start = Instant::now();
        let w = wave(&spec)?;
        let v0 = InitialData::Step { at: 0.0 }.resolve(&d, None).map_err(|e| e.to_string())?;
        let traj = run(&spec, w.c(), &d, v0, &ctrl, plan)?;
        let report = convergence_report(&traj, &w.profile, None).map_err(|e| e.to_string())?;
        let secs = start.elapsed().as_secs_f64();
        let mut line = format!(
            "{name}: sup dist {:.1e}, zeta {:.4} spread {:.1e}, monotone tail {}, {secs:.1}s",
            report.final_sup_dist, report.zeta_inf, report.zeta_spread, report.monotone_tail
        );
        ok &= report.final_sup_dist <= 1e-2 && report.zeta_spread <= 1e-3 && report.monotone_tail && secs < 60.0;
        if let (Endpoint::Finite(z0), Endpoint::Finite(z1)) = (w.profile.z0, w.profile.z1) {
            let v = &traj.last().unwrap().v;
            let zeta = report.zeta_inf;
            let off = |margin: f64| {
                (0..v.len())
                    .map(|i| {
                        let z = d.z(i) + zeta;
                        if z < z0 - margin {
                            v[i]
                        } else if z > z1 + margin {
                            1.0 - v[i]
                        } else {
                            0.0
                        }
                    })
                    .fold(0.0, f64::max)
            };
            // Each step smooths the front over about one diffusion length of
            // the step; beyond it the plateaus must be exact.
            let layer = 8.0 * (2.0 * ctrl.dt).sqrt();
            let (exact, near) = (off(layer), off(d.dz()));
            ok &= exact <= 1e-10;
            line.push_str(&format!(", plateau deviation {exact:.1e} beyond {layer:.2} ({near:.1e} beyond one cell)"));
        }
        notes.push(line);
    }
    Ok((ok, notes.join("; ")))
}

fn stability() -> Check {
    let spec = cubic(0.75);
    let w = wave(&spec)?;
    let d = Domain::new(-30.0, 30.0, 6000).map_err(|e| e.to_string())?;
    let plan = RunPlan { t_end: 20.0, snapshot_every: 0.5 };
    let probe = stability_probe(&w, &d, &ctrl(0.002), plan, &PROBE_EPSILONS, Execution::default())
        .map_err(|e| e.to_string())?;
    let ratios: Vec<String> = probe.entries.iter().map(|e| format!("{:.3}", e.ratio)).collect();
    let ok = probe.c_prime.is_finite() && probe.spread <= 2.0;
    Ok((ok, format!("C' = {:.3}, ratios [{}], spread {:.2}", probe.c_prime, ratios.join(", "), probe.spread)))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("speed oracle", speed_oracle),
        ("first-integral identity", first_integral),
        ("y oracle", y_oracle),
        ("profile oracle", profile_oracle),
        ("sharp-front detection", sharp_fronts),
        ("stationarity", stationarity),
        ("scheme cross-validation", cross_validation),
        ("comparison principle", comparison),
        ("lyapunov monotonicity and dissipation", lyapunov),
        ("end-to-end convergence", end_to_end),
        ("stability probe", stability),
    ];
    let mut failures = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let (ok, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
        if !ok {
            failures += 1;
        }
        println!("{} {:>2} {name}: {detail}", if ok { "PASS" } else { "FAIL" }, k + 1);
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
