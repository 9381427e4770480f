use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::hermite::{eval_hermite_1d, holomorphic_modulus, radial_profile};
use super::{BasisFamily, Grid2D};
use crate::error::{Error, Result};

const SELF_CHECK_TOL: f64 = 1e-3;
const GOLDEN_ITERS: usize = 80;

/// A numerical norm together with the difference between the two
/// resolutions (or, for p = ∞, between the grid maximum and its refinement).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub error: f64,
}

/// Numerical L^p(ℝ²) norm of a basis function, p ∈ [2, ∞].
///
/// Every family used here factorizes into one-dimensional profiles (radial
/// for the holomorphic and radial chains, Cartesian for E_N), so the grid is
/// used along a radius or an axis. The computation is repeated on the
/// refined grid and rejected when the two disagree by more than 1e-3.
pub fn lp_norm(family: BasisFamily, index: usize, p: f64, grid: &Grid2D) -> Result<NormEstimate> {
    family.validate_index(index)?;
    if !(p >= 2.0) {
        return Err(Error::Config(format!("p must lie in [2, ∞], got {p}")));
    }
    let coarse = lp_norm_at(family, index, p, grid)?;
    let fine = lp_norm_at(family, index, p, &grid.refined())?;
    let rel_diff = (fine - coarse).abs() / fine.abs().max(f64::MIN_POSITIVE);
    if rel_diff > SELF_CHECK_TOL {
        return Err(Error::GridInadequate { rel_diff, tol: SELF_CHECK_TOL });
    }
    let error = if p.is_infinite() {
        let grid_max = sup_grid_only(family, index, grid)?;
        (fine - grid_max).abs().max((fine - coarse).abs())
    } else {
        (fine - coarse).abs()
    };
    Ok(NormEstimate { value: fine, error })
}

fn lp_norm_at(family: BasisFamily, index: usize, p: f64, grid: &Grid2D) -> Result<f64> {
    let l = grid.half_width;
    let n = grid.points;
    match family {
        BasisFamily::Holomorphic | BasisFamily::Radial => {
            let profile = |r: f64| match family {
                BasisFamily::Holomorphic => holomorphic_modulus(index, r),
                _ => radial_profile(index, r * r).abs(),
            };
            if p.is_infinite() {
                Ok(refined_max(&profile, 0.0, l, n).1)
            } else {
                let integral = simpson(|r| 2.0 * PI * r * profile(r).powf(p), 0.0, l, n);
                Ok(integral.powf(1.0 / p))
            }
        }
        BasisFamily::Eigenspace { level } => {
            let (ka, kb) = (index, level - index);
            let fa = |x: f64| eval_hermite_1d(ka, x).map(f64::abs).unwrap_or(f64::NAN);
            let fb = |x: f64| eval_hermite_1d(kb, x).map(f64::abs).unwrap_or(f64::NAN);
            let v = if p.is_infinite() {
                refined_max(&fa, -l, l, n).1 * refined_max(&fb, -l, l, n).1
            } else {
                let ia = simpson(|x| fa(x).powf(p), -l, l, n);
                let ib = simpson(|x| fb(x).powf(p), -l, l, n);
                (ia * ib).powf(1.0 / p)
            };
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::HermiteOverflow { n: ka.max(kb), x: l })
            }
        }
    }
}

fn sup_grid_only(family: BasisFamily, index: usize, grid: &Grid2D) -> Result<f64> {
    let l = grid.half_width;
    let n = grid.points;
    Ok(match family {
        BasisFamily::Holomorphic => refined_max(&|r| holomorphic_modulus(index, r), 0.0, l, n).0,
        BasisFamily::Radial => refined_max(&|r| radial_profile(index, r * r).abs(), 0.0, l, n).0,
        BasisFamily::Eigenspace { level } => {
            let fa = |x: f64| eval_hermite_1d(index, x).map(f64::abs).unwrap_or(0.0);
            let fb = |x: f64| eval_hermite_1d(level - index, x).map(f64::abs).unwrap_or(0.0);
            refined_max(&fa, -l, l, n).0 * refined_max(&fb, -l, l, n).0
        }
    })
}

/// Composite Simpson rule with `points` samples (rounded up to odd).
pub(crate) fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, points: usize) -> f64 {
    let intervals = {
        let m = points.max(3) - 1;
        m + m % 2
    };
    let h = (b - a) / intervals as f64;
    let mut acc = f(a) + f(b);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// (grid maximum, maximum refined by golden-section search around it).
pub(crate) fn refined_max<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, points: usize) -> (f64, f64) {
    let h = (b - a) / (points - 1) as f64;
    let (mut best_i, mut best) = (0, f64::NEG_INFINITY);
    for i in 0..points {
        let v = f(a + i as f64 * h);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let lo = a + best_i.saturating_sub(1) as f64 * h;
    let hi = (a + (best_i + 1) as f64 * h).min(b);
    let refined = golden_max(f, lo, hi).max(best);
    (best, refined)
}

pub(crate) fn golden_max<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..GOLDEN_ITERS {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
        if hi - lo < 1e-14 * (1.0 + hi.abs()) {
            break;
        }
    }
    fc.max(fd)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_state_is_normalized() {
        let grid = Grid2D::for_1d(BasisFamily::Holomorphic.eigenvalue(0));
        let est = lp_norm(BasisFamily::Holomorphic, 0, 2.0, &grid).unwrap();
        assert!((est.value - 1.0).abs() < 1e-10, "{est:?}");
    }

    #[test]
    fn every_family_is_l2_normalized() {
        for (fam, idx) in
            [(BasisFamily::Holomorphic, 7), (BasisFamily::Radial, 5), (BasisFamily::Eigenspace { level: 6 }, 2)]
        {
            let grid = Grid2D::for_1d(fam.eigenvalue(idx));
            let est = lp_norm(fam, idx, 2.0, &grid).unwrap();
            assert!((est.value - 1.0).abs() < 1e-10, "{fam} {idx}: {est:?}");
        }
    }

    #[test]
    fn sup_of_holomorphic_mode_matches_closed_form() {
        // max at r = √n: n^{n/2} e^{-n/2} / √(π n!)
        let n = 9usize;
        let grid = Grid2D::for_1d(BasisFamily::Holomorphic.eigenvalue(n));
        let est = lp_norm(BasisFamily::Holomorphic, n, f64::INFINITY, &grid).unwrap();
        let nf = n as f64;
        let exact = (0.5 * nf * nf.ln() - 0.5 * nf - 0.5 * crate::special::ln_factorial(n)).exp() / PI.sqrt();
        assert!((est.value - exact).abs() < 1e-12, "{} vs {}", est.value, exact);
        assert!(est.error >= 0.0 && est.error < 1e-4);
    }

    #[test]
    fn coarse_grid_is_detected() {
        let grid = Grid2D::new(Grid2D::half_width_for(66.0), 12);
        let err = lp_norm(BasisFamily::Holomorphic, 32, 4.0, &grid).unwrap_err();
        assert!(matches!(err, Error::GridInadequate { .. }));
    }

    #[test]
    fn narrow_window_is_detected_or_fails() {
        // window far too small: the two resolutions agree but miss all the mass,
        // so the normalization test exposes it instead
        let grid = Grid2D::new(1.0, 2048);
        let est = lp_norm(BasisFamily::Holomorphic, 20, 2.0, &grid).unwrap();
        assert!(est.value < 0.5);
    }

    #[test]
    fn p_below_two_rejected() {
        let grid = Grid2D::for_1d(4.0);
        assert!(lp_norm(BasisFamily::Radial, 1, 1.5, &grid).is_err());
    }
}
