//! Eigenbases of the 2D harmonic oscillator H = −Δ + |x|² used by the
//! simulator: the holomorphic (special Hermite) chain, the radial chain and
//! the Cartesian basis h_k(x1) h_{N−k}(x2) of an eigenspace E_N.

mod grid;
pub mod hermite;
mod norms;
mod quadrature;

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use grid::Grid2D;
pub use hermite::{eval_hermite_1d, hermite_functions};
pub use norms::{lp_norm, NormEstimate};
pub use quadrature::{build_quadrature, QuadratureRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BasisFamily {
    Holomorphic,
    Radial,
    Eigenspace { level: usize },
}

impl fmt::Display for BasisFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisFamily::Holomorphic => write!(f, "holomorphic"),
            BasisFamily::Radial => write!(f, "radial"),
            BasisFamily::Eigenspace { level } => write!(f, "eigenspace E_{level}"),
        }
    }
}

impl BasisFamily {
    /// Eigenvalue of H on mode `index`.
    pub fn eigenvalue(&self, index: usize) -> f64 {
        let n = index as f64;
        match self {
            BasisFamily::Holomorphic => 2.0 * n + 2.0,
            BasisFamily::Radial => 4.0 * n + 2.0,
            BasisFamily::Eigenspace { level } => 2.0 * *level as f64 + 2.0,
        }
    }

    pub fn eigenvalues(&self, cutoff: usize) -> Vec<f64> {
        (0..=cutoff).map(|n| self.eigenvalue(n)).collect()
    }

    /// Largest admissible mode index for a given cutoff (an eigenspace has a
    /// fixed dimension).
    pub fn max_index(&self, cutoff: usize) -> usize {
        match self {
            BasisFamily::Eigenspace { level } => *level,
            _ => cutoff,
        }
    }

    pub fn validate_index(&self, index: usize) -> Result<()> {
        match self {
            BasisFamily::Eigenspace { level } if index > *level => Err(Error::InvalidIndex { family: *self, index }),
            _ => Ok(()),
        }
    }

    /// Short tag used in file names and on the command line.
    pub fn tag(&self) -> String {
        match self {
            BasisFamily::Holomorphic => "hol".into(),
            BasisFamily::Radial => "rad".into(),
            BasisFamily::Eigenspace { level } => format!("eig{level}"),
        }
    }
}

/// Value of basis function `index` of `family` at `x`.
pub fn eval_basis(family: BasisFamily, index: usize, x: [f64; 2]) -> Result<Complex64> {
    family.validate_index(index)?;
    let r2 = x[0] * x[0] + x[1] * x[1];
    Ok(match family {
        BasisFamily::Holomorphic => {
            let r = r2.sqrt();
            let theta = x[1].atan2(x[0]);
            Complex64::from_polar(hermite::holomorphic_modulus(index, r), index as f64 * theta)
        }
        BasisFamily::Radial => Complex64::new(hermite::radial_profile(index, r2), 0.0),
        BasisFamily::Eigenspace { level } => {
            let a = eval_hermite_1d(index, x[0])?;
            let b = eval_hermite_1d(level - index, x[1])?;
            Complex64::new(a * b, 0.0)
        }
    })
}

/// Polynomial parts φ_n(x) e^{|x|²/2} for all modes 0..=max_index at one
/// point. These are what a Gauss–Hermite rule integrates against the
/// Gaussian weight.
pub fn envelope_table(family: BasisFamily, max_index: usize, x: [f64; 2]) -> Vec<Complex64> {
    match family {
        BasisFamily::Holomorphic => {
            let z = Complex64::new(x[0], x[1]);
            let mut out = Vec::with_capacity(max_index + 1);
            let mut cur = Complex64::new(1.0 / PI.sqrt(), 0.0);
            out.push(cur);
            for k in 1..=max_index {
                cur = cur * z / (k as f64).sqrt();
                out.push(cur);
            }
            out
        }
        BasisFamily::Radial => {
            let u = x[0] * x[0] + x[1] * x[1];
            hermite::laguerre_polys(max_index, u).into_iter().map(|l| Complex64::new(l / PI.sqrt(), 0.0)).collect()
        }
        BasisFamily::Eigenspace { level } => {
            let a = hermite::hermite_envelopes(level, x[0]);
            let b = hermite::hermite_envelopes(level, x[1]);
            (0..=max_index.min(level)).map(|k| Complex64::new(a[k] * b[level - k], 0.0)).collect()
        }
    }
}

/// Number of Gauss–Hermite nodes per axis that integrates a product of four
/// envelopes with indices ≤ `max_index` exactly.
pub fn nodes_for_quartic(family: BasisFamily, max_index: usize) -> usize {
    let per_axis_degree = match family {
        BasisFamily::Holomorphic => 4 * max_index,
        BasisFamily::Radial => 8 * max_index,
        BasisFamily::Eigenspace { level } => 4 * level,
    };
    per_axis_degree / 2 + 8
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eigenvalues() {
        assert_eq!(BasisFamily::Holomorphic.eigenvalue(3), 8.0);
        assert_eq!(BasisFamily::Radial.eigenvalue(3), 14.0);
        let e = BasisFamily::Eigenspace { level: 5 };
        assert!((0..=5).all(|k| e.eigenvalue(k) == 12.0));
    }

    #[test]
    fn values_at_origin() {
        let v = eval_basis(BasisFamily::Holomorphic, 0, [0.0, 0.0]).unwrap();
        assert_relative_eq!(v.re, 1.0 / PI.sqrt(), epsilon = 1e-15);
        let v = eval_basis(BasisFamily::Radial, 0, [0.0, 0.0]).unwrap();
        assert_relative_eq!(v.re, 1.0 / PI.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn eigenspace_index_checked() {
        let fam = BasisFamily::Eigenspace { level: 2 };
        assert!(eval_basis(fam, 2, [0.1, 0.2]).is_ok());
        assert!(matches!(eval_basis(fam, 3, [0.1, 0.2]), Err(Error::InvalidIndex { .. })));
    }

    #[test]
    fn envelope_times_gaussian_is_the_basis_function() {
        let x = [0.8, -1.1];
        let g = (-(x[0] * x[0] + x[1] * x[1]) / 2.0f64).exp();
        for fam in [BasisFamily::Holomorphic, BasisFamily::Radial, BasisFamily::Eigenspace { level: 6 }] {
            let env = envelope_table(fam, 6, x);
            for (k, e) in env.iter().enumerate() {
                let direct = eval_basis(fam, k, x).unwrap();
                assert!((e * g - direct).norm() < 1e-13, "{fam} {k}");
            }
        }
    }
}
