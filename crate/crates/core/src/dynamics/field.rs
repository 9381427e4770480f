use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use super::{mass, propagate_linear, CoefficientState};
use crate::basis::{envelope_table, hermite_functions, BasisFamily, Grid2D};
use crate::error::{Error, Result};

const SELF_CHECK_TOL: f64 = 1e-3;

/// Field values on a grid, row-major with x1 as the row index.
#[derive(Debug, Clone)]
pub struct FieldSamples {
    pub grid: Grid2D,
    pub values: Vec<Complex64>,
}

impl FieldSamples {
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.grid.points + j]
    }

    /// Largest |u| on the grid and the flat index where it occurs.
    pub fn max_modulus(&self) -> (f64, usize) {
        self.values
            .iter()
            .enumerate()
            .fold((0.0, 0), |(m, k), (i, v)| if v.norm() > m { (v.norm(), i) } else { (m, k) })
    }

    /// Riemann sum of |u|^p h².
    pub fn lp_sum(&self, p: f64) -> f64 {
        let h = self.grid.spacing();
        self.values.iter().map(|v| v.norm().powf(p)).sum::<f64>() * h * h
    }
}

/// u(x) = Σ c_n φ_n(x) on every grid point. The discrete mass is compared
/// with Σ|c_n|² and a mismatch above 1e−3 (relative) is reported as an
/// inadequate grid.
pub fn eval_field(state: &CoefficientState, grid: &Grid2D) -> Result<FieldSamples> {
    state.validate()?;
    let values = match state.family {
        BasisFamily::Eigenspace { level } => eigenspace_field(level, &state.coeffs, grid)?,
        family => {
            let coords = grid.coords();
            let n = state.len() - 1;
            coords
                .par_iter()
                .flat_map_iter(|&x1| {
                    let coords = &coords;
                    coords.iter().map(move |&x2| {
                        let env = envelope_table(family, n, [x1, x2]);
                        let g = (-(x1 * x1 + x2 * x2) / 2.0).exp();
                        env.iter().zip(&state.coeffs).map(|(e, c)| e * c).sum::<Complex64>() * g
                    })
                })
                .collect()
        }
    };
    let samples = FieldSamples { grid: *grid, values };
    let m = mass(state);
    if m > 0.0 {
        let rel = (samples.lp_sum(2.0) - m).abs() / m;
        if rel > SELF_CHECK_TOL {
            return Err(Error::GridInadequate { rel_diff: rel, tol: SELF_CHECK_TOL });
        }
    }
    Ok(samples)
}

/// Table A[i, k] = h_k(x_i) for k = 0..=level.
pub(crate) fn hermite_table(level: usize, coords: &[f64]) -> Result<Array2<f64>> {
    let mut a = Array2::zeros((coords.len(), level + 1));
    for (i, &x) in coords.iter().enumerate() {
        let h = hermite_functions(level, x)?;
        for (k, v) in h.into_iter().enumerate() {
            a[[i, k]] = v;
        }
    }
    Ok(a)
}

/// u = A diag(c) Bᵀ with A[i,k] = h_k(x_i), B[j,k] = h_{N−k}(x_j); real and
/// imaginary parts as two real products.
pub(crate) fn eigenspace_field_from_table(table: &Array2<f64>, coeffs: &[Complex64]) -> (Array2<f64>, Array2<f64>) {
    let level = coeffs.len() - 1;
    let mut scaled_re = table.clone();
    let mut scaled_im = table.clone();
    for (k, c) in coeffs.iter().enumerate() {
        scaled_re.column_mut(k).mapv_inplace(|v| v * c.re);
        scaled_im.column_mut(k).mapv_inplace(|v| v * c.im);
    }
    // B = A with columns reversed
    let mut reversed = table.clone();
    for k in 0..=level {
        reversed.column_mut(k).assign(&table.column(level - k));
    }
    let bt = reversed.t();
    (scaled_re.dot(&bt), scaled_im.dot(&bt))
}

fn eigenspace_field(level: usize, coeffs: &[Complex64], grid: &Grid2D) -> Result<Vec<Complex64>> {
    let table = hermite_table(level, &grid.coords())?;
    let (re, im) = eigenspace_field_from_table(&table, coeffs);
    Ok(re.iter().zip(im.iter()).map(|(&a, &b)| Complex64::new(a, b)).collect())
}

/// ‖e^{−itH}u‖⁴ in L⁴([−π/4, π/4] × ℝ²) by brute force: field on a grid at
/// each node of a composite Simpson rule in time. Used as an independent
/// check of the quartic-form shortcut.
pub fn spacetime_l4_direct(state: &CoefficientState, grid: &Grid2D, time_intervals: usize) -> Result<f64> {
    let m = time_intervals.max(2) + time_intervals % 2;
    let (a, b) = (-std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_4);
    let h = (b - a) / m as f64;
    let mut total = 0.0;
    for i in 0..=m {
        let w = if i == 0 || i == m {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let u = eval_field(&propagate_linear(state, a + i as f64 * h), grid)?;
        total += w * u.lp_sum(4.0);
    }
    Ok(total * h / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ground_state_peak() {
        let s = CoefficientState::single_mode(BasisFamily::Holomorphic, 3, 0, Complex64::new(1.0, 0.0)).unwrap();
        let g = Grid2D::new(7.0, 141);
        let f = eval_field(&s, &g).unwrap();
        let (m, idx) = f.max_modulus();
        assert!((m - 1.0 / PI.sqrt()).abs() < 1e-14);
        assert_eq!(idx, 70 * 141 + 70);
    }

    #[test]
    fn eigenspace_matmul_matches_pointwise() {
        let family = BasisFamily::Eigenspace { level: 3 };
        let c: Vec<Complex64> = (0..4).map(|k| Complex64::new(0.3 * k as f64 - 0.2, 0.1 + 0.05 * k as f64)).collect();
        let s = CoefficientState::new(family, c.clone()).unwrap();
        let g = Grid2D::new(7.0, 101);
        let f = eval_field(&s, &g).unwrap();
        for &(i, j) in &[(10, 20), (50, 50), (77, 3)] {
            let x = [g.coord(i), g.coord(j)];
            let direct: Complex64 = (0..4).map(|k| crate::basis::eval_basis(family, k, x).unwrap() * c[k]).sum();
            assert!((f.at(i, j) - direct).norm() < 1e-14);
        }
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let s = CoefficientState::single_mode(BasisFamily::Holomorphic, 8, 8, Complex64::new(1.0, 0.0)).unwrap();
        assert!(matches!(eval_field(&s, &Grid2D::new(2.0, 9)), Err(Error::GridInadequate { .. })));
    }
}
