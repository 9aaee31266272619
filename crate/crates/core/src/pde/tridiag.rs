//! Thomas algorithm for constant tridiagonal systems, factored once.

use crate::error::{Error, Result};

/// Row `i` reads `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = b[i]`;
/// `lower[0]` and `upper[n-1]` are ignored.
#[derive(Clone, Debug)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

/// LU factors of a [`Tridiagonal`] matrix without pivoting.
#[derive(Clone, Debug)]
pub struct Factored {
    lower: Vec<f64>,
    inv_pivot: Vec<f64>,
    upper_scaled: Vec<f64>,
}

impl Tridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn factor(&self) -> Result<Factored> {
        let n = self.len();
        let mut inv_pivot = vec![0.0; n];
        let mut upper_scaled = vec![0.0; n];
        let mut prev = 0.0;
        for i in 0..n {
            let pivot = if i == 0 { self.diag[0] } else { self.diag[i] - self.lower[i] * prev };
            if !pivot.is_finite() || pivot.abs() < 1e-300 {
                return Err(Error::TridiagonalFailure { row: i, pivot });
            }
            inv_pivot[i] = 1.0 / pivot;
            upper_scaled[i] = if i + 1 < n { self.upper[i] * inv_pivot[i] } else { 0.0 };
            prev = upper_scaled[i];
        }
        Ok(Factored { lower: self.lower.clone(), inv_pivot, upper_scaled })
    }

    /// `out = A x`.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let n = self.len();
        for i in 0..n {
            let mut v = self.diag[i] * x[i];
            if i > 0 {
                v += self.lower[i] * x[i - 1];
            }
            if i + 1 < n {
                v += self.upper[i] * x[i + 1];
            }
            out[i] = v;
        }
    }
}

impl Factored {
    /// Solves in place: `b` becomes `x`.
    pub fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        b[0] *= self.inv_pivot[0];
        for i in 1..n {
            b[i] = (b[i] - self.lower[i] * b[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            b[i] -= self.upper_scaled[i] * b[i + 1];
        }
    }
}
