//! Theta-scheme finite differences: implicit diffusion and centred
//! advection, explicit equilibrium-protected reaction.

use super::tridiag::{Factored, Tridiagonal};
use super::{protected_euler, Domain, SchemeCtrl};
use crate::error::Result;
use crate::reaction::ReactionSpec;

#[derive(Clone, Debug)]
pub struct ImexStepper {
    spec: ReactionSpec,
    dt: f64,
    theta: f64,
    operator: Tridiagonal,
    main: Factored,
    startup: Option<Factored>,
    startup_left: usize,
    rhs: Vec<f64>,
    applied: Vec<f64>,
}

/// `A v = v_zz + c v_z` on interior rows, zero on the two boundary rows so
/// that boundary values are held.
fn operator(n: usize, dz: f64, c: f64) -> Tridiagonal {
    let d2 = 1.0 / (dz * dz);
    let d1 = c / (2.0 * dz);
    let mut lower = vec![d2 - d1; n];
    let mut diag = vec![-2.0 * d2; n];
    let mut upper = vec![d2 + d1; n];
    for i in [0, n - 1] {
        lower[i] = 0.0;
        diag[i] = 0.0;
        upper[i] = 0.0;
    }
    Tridiagonal { lower, diag, upper }
}

/// `I - w A`.
fn implicit_matrix(a: &Tridiagonal, w: f64) -> Tridiagonal {
    Tridiagonal {
        lower: a.lower.iter().map(|x| -w * x).collect(),
        diag: a.diag.iter().map(|x| 1.0 - w * x).collect(),
        upper: a.upper.iter().map(|x| -w * x).collect(),
    }
}

impl ImexStepper {
    pub fn new(spec: &ReactionSpec, c: f64, domain: &Domain, ctrl: &SchemeCtrl) -> Result<Self> {
        let n = domain.n_cells + 1;
        let a = operator(n, domain.dz(), c);
        let main = implicit_matrix(&a, ctrl.theta * ctrl.dt).factor()?;
        let startup = if ctrl.rannacher_steps > 0 && ctrl.theta < 1.0 {
            Some(implicit_matrix(&a, 0.5 * ctrl.dt).factor()?)
        } else {
            None
        };
        Ok(Self {
            spec: spec.clone(),
            dt: ctrl.dt,
            theta: ctrl.theta,
            operator: a,
            main,
            startup,
            startup_left: ctrl.rannacher_steps,
            rhs: vec![0.0; n],
            applied: vec![0.0; n],
        })
    }

    /// One step of length `h` with implicit weight `theta`.
    fn substep(&mut self, v: &mut [f64], h: f64, theta: f64, startup: bool) {
        let n = v.len();
        let (left, right) = (v[0], v[n - 1]);
        if theta < 1.0 {
            self.operator.apply(v, &mut self.applied);
        }
        for i in 0..n {
            let explicit = if theta < 1.0 { (1.0 - theta) * h * self.applied[i] } else { 0.0 };
            self.rhs[i] = protected_euler(&self.spec, v[i], h) + explicit;
        }
        self.rhs[0] = left;
        self.rhs[n - 1] = right;
        let factors = if startup { self.startup.as_ref().unwrap() } else { &self.main };
        factors.solve(&mut self.rhs);
        v.copy_from_slice(&self.rhs);
    }

    /// Advances `v` by one step and returns nothing; clamping is left to the
    /// caller so that its size can be recorded.
    pub fn step(&mut self, v: &mut [f64]) {
        if self.startup_left > 0 && self.startup.is_some() {
            self.startup_left -= 1;
            let h = 0.5 * self.dt;
            self.substep(v, h, 1.0, true);
            self.substep(v, h, 1.0, true);
        } else {
            let (h, theta) = (self.dt, self.theta);
            self.substep(v, h, theta, false);
        }
    }
}
