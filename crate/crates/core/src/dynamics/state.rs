use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::BasisFamily;
use crate::error::{Error, Result};

/// Spectral coefficients c_0..c_N of u on one invariant basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientState {
    pub family: BasisFamily,
    pub coeffs: Vec<Complex64>,
    #[serde(default)]
    pub time: f64,
}

impl CoefficientState {
    pub fn new(family: BasisFamily, coeffs: Vec<Complex64>) -> Result<Self> {
        let state = Self { family, coeffs, time: 0.0 };
        state.validate()?;
        Ok(state)
    }

    pub fn zeros(family: BasisFamily, cutoff: usize) -> Self {
        let dim = family.max_index(cutoff) + 1;
        Self { family, coeffs: vec![Complex64::default(); dim], time: 0.0 }
    }

    /// Unit coefficient on one mode.
    pub fn single_mode(family: BasisFamily, cutoff: usize, mode: usize, value: Complex64) -> Result<Self> {
        let mut s = Self::zeros(family, cutoff);
        if mode >= s.coeffs.len() {
            return Err(Error::InvalidIndex { family, index: mode });
        }
        s.coeffs[mode] = value;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if let BasisFamily::Eigenspace { level } = self.family {
            if self.coeffs.len() != level + 1 {
                return Err(Error::DimensionMismatch(format!(
                    "E_{level} has dimension {}, state has {} coefficients",
                    level + 1,
                    self.coeffs.len()
                )));
            }
        }
        if self.coeffs.is_empty() {
            return Err(Error::DimensionMismatch("state has no coefficients".into()));
        }
        if !self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite()) || !self.time.is_finite() {
            return Err(Error::NonFinite { t: self.time });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn cutoff(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        (0..self.coeffs.len()).map(|n| self.family.eigenvalue(n)).collect()
    }

    /// ℓ² distance between coefficient vectors.
    pub fn distance(&self, other: &Self) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self { family: self.family, coeffs: self.coeffs.iter().map(|c| c * factor).collect(), time: self.time }
    }
}
