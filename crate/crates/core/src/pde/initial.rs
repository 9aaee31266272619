//! Initial data for the moving-frame problem and the plateau check that the
//! envelope construction relies on.

use serde::{Deserialize, Serialize};

use super::Domain;
use crate::error::{Error, Result};
use crate::profile::ProfileTable;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InitialData {
    /// 0 left of `at`, 1 right of it, 1/2 on a node exactly at `at`.
    Step { at: f64 },
    /// `left + (right - left) (1 + tanh((z - at) / width)) / 2`.
    SmoothedStep { at: f64, width: f64, left: f64, right: f64 },
    /// `U(z + shift) + epsilon exp(-((z + shift) / 2)^2)`, clipped to `[0, 1]`.
    ProfilePerturbation { epsilon: f64, shift: f64 },
    /// Piecewise-linear through `(z, v)` knots, constant beyond them.
    Table { z: Vec<f64>, v: Vec<f64> },
}

impl InitialData {
    /// Values on the grid nodes. Boundary nodes are pinned to 0 and 1.
    pub fn resolve(&self, domain: &Domain, profile: Option<&ProfileTable>) -> Result<Vec<f64>> {
        let mut v: Vec<f64> = match self {
            InitialData::Step { at } => domain
                .nodes()
                .map(|z| {
                    if z < *at {
                        0.0
                    } else if z > *at {
                        1.0
                    } else {
                        0.5
                    }
                })
                .collect(),
            InitialData::SmoothedStep { at, width, left, right } => {
                if !(*width > 0.0) {
                    return Err(Error::Config(format!("smoothed step width must be positive, got {width}")));
                }
                domain
                    .nodes()
                    .map(|z| left + (right - left) * 0.5 * (1.0 + ((z - at) / width).tanh()))
                    .collect()
            }
            InitialData::ProfilePerturbation { epsilon, shift } => {
                let Some(p) = profile else {
                    return Err(Error::Config("profile perturbation data need a profile".into()));
                };
                domain
                    .nodes()
                    .map(|z| {
                        let x = z + shift;
                        (p.eval(x) + epsilon * (-(x / 2.0).powi(2)).exp()).clamp(0.0, 1.0)
                    })
                    .collect()
            }
            InitialData::Table { z, v } => {
                if z.len() != v.len() || z.is_empty() {
                    return Err(Error::Config("table initial data need equally many z and v values".into()));
                }
                if z.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Config("table initial data need strictly increasing z".into()));
                }
                domain.nodes().map(|x| interpolate(z, v, x)).collect()
            }
        };
        if v.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::Config("initial data must take values in [0, 1]".into()));
        }
        let n = v.len();
        v[0] = 0.0;
        v[n - 1] = 1.0;
        Ok(v)
    }
}

fn interpolate(z: &[f64], v: &[f64], x: f64) -> f64 {
    let n = z.len();
    if x <= z[0] {
        return v[0];
    }
    if x >= z[n - 1] {
        return v[n - 1];
    }
    let j = z.partition_point(|&a| a <= x);
    let (za, zb) = (z[j - 1], z[j]);
    if x == za {
        return v[j - 1];
    }
    v[j - 1] + (v[j] - v[j - 1]) * (x - za) / (zb - za)
}

/// Plateau estimates: the largest value over the leftmost tenth of the nodes
/// and the smallest over the rightmost tenth.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plateaus {
    pub left: f64,
    pub right: f64,
}

pub fn plateaus(v: &[f64]) -> Plateaus {
    let k = (v.len() / 10).max(1);
    let left = v[..k].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let right = v[v.len() - k..].iter().copied().fold(f64::INFINITY, f64::min);
    Plateaus { left, right }
}

/// Requires `v0(-inf) < s0 - 2 eta` and `v0(+inf) > s0 + 2 eta`.
pub fn check_h5(v: &[f64], s0: f64, eta: f64) -> Result<Plateaus> {
    let p = plateaus(v);
    let margin = 2.0 * eta;
    if p.left < s0 - margin && p.right > s0 + margin {
        Ok(p)
    } else {
        Err(Error::PlateauViolation { left: p.left, right: p.right, s0, margin })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn domain() -> Domain {
        Domain::new(-10.0, 10.0, 200).unwrap()
    }

    #[test]
    fn step_has_extreme_plateaus() {
        let v = InitialData::Step { at: 0.0 }.resolve(&domain(), None).unwrap();
        assert_eq!(v[100], 0.5);
        let p = check_h5(&v, 0.75, 0.05).unwrap();
        assert_eq!((p.left, p.right), (0.0, 1.0));
    }

    #[test]
    fn constant_at_s0_violates() {
        let data = InitialData::Table { z: vec![0.0], v: vec![0.75] };
        let mut v = data.resolve(&domain(), None).unwrap();
        v.iter_mut().for_each(|x| *x = 0.75);
        assert!(matches!(check_h5(&v, 0.75, 0.05), Err(Error::PlateauViolation { .. })));
    }

    #[test]
    fn high_left_plateau_violates_margin() {
        let data = InitialData::SmoothedStep { at: 0.0, width: 1.0, left: 0.7, right: 1.0 };
        let v = data.resolve(&domain(), None).unwrap();
        // The pinned boundary node does not lower the plateau estimate below 0.7.
        let err = check_h5(&v, 0.75, 0.05).unwrap_err();
        match err {
            Error::PlateauViolation { left, .. } => assert!((left - 0.7).abs() < 1e-6),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn table_interpolates_linearly() {
        let data = InitialData::Table { z: vec![-1.0, 1.0], v: vec![0.2, 0.6] };
        let v = data.resolve(&domain(), None).unwrap();
        assert!((v[100] - 0.4).abs() < 1e-15);
        assert_eq!(v[50], 0.2);
        assert_eq!(v[199], 0.6);
    }

    #[test]
    fn out_of_range_rejected() {
        let data = InitialData::SmoothedStep { at: 0.0, width: 1.0, left: -0.5, right: 1.0 };
        assert!(data.resolve(&domain(), None).is_err());
    }
}
