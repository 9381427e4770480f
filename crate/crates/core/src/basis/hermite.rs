//! Stable evaluation of the 1D Hermite functions, the Laguerre profiles of
//! the radial family and the modulus of the holomorphic (special) Hermite
//! functions.
//!
//! All recurrences run on a rescaled value with a separate log-scale so that
//! neither the Gaussian factor nor the polynomial growth can overflow.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::special::ln_factorial;

const RESCALE_ABOVE: f64 = 1e150;
const LN_RESCALE: f64 = 345.387_763_949_107; // ln(1e150)

/// π^{-1/4}
pub(crate) const PI_M4: f64 = 0.751_125_544_464_942_5;

#[inline]
fn unscale(value: f64, log_scale: f64) -> f64 {
    if value == 0.0 {
        return 0.0;
    }
    // exp underflows to 0 when the true value is below f64 range
    value.signum() * (value.abs().ln() + log_scale).exp()
}

fn check_abscissa(n: usize, x: f64) -> Result<f64> {
    let x2 = x * x;
    if !x2.is_finite() {
        return Err(Error::HermiteOverflow { n, x });
    }
    Ok(x2)
}

/// L²(ℝ)-normalized Hermite function h_n(x) = (2^n n! √π)^{-1/2} H_n(x) e^{-x²/2}.
pub fn eval_hermite_1d(n: usize, x: f64) -> Result<f64> {
    Ok(*hermite_functions(n, x)?.last().unwrap())
}

/// h_0(x), ..., h_{n_max}(x) by the normalized three-term recurrence
/// h_{k+1} = x √(2/(k+1)) h_k − √(k/(k+1)) h_{k−1}.
pub fn hermite_functions(n_max: usize, x: f64) -> Result<Vec<f64>> {
    let x2 = check_abscissa(n_max, x)?;
    let mut out = Vec::with_capacity(n_max + 1);
    let mut log_scale = -0.5 * x2;
    let mut prev = 0.0;
    let mut cur = PI_M4;
    out.push(unscale(cur, log_scale));
    for k in 0..n_max {
        let kf = k as f64;
        let next = x * (2.0 / (kf + 1.0)).sqrt() * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if !cur.is_finite() {
            return Err(Error::HermiteOverflow { n: k + 1, x });
        }
        if cur.abs() > RESCALE_ABOVE {
            prev /= RESCALE_ABOVE;
            cur /= RESCALE_ABOVE;
            log_scale += LN_RESCALE;
        }
        out.push(unscale(cur, log_scale));
    }
    Ok(out)
}

/// Polynomial parts p_k(x) = h_k(x) e^{x²/2}, k = 0..=n_max. Only meant for
/// moderate |x| (quadrature nodes), no rescaling is done.
pub fn hermite_envelopes(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut prev = 0.0;
    let mut cur = PI_M4;
    out.push(cur);
    for k in 0..n_max {
        let kf = k as f64;
        let next = x * (2.0 / (kf + 1.0)).sqrt() * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        out.push(cur);
    }
    out
}

/// Laguerre polynomials L_0(u), ..., L_{n_max}(u) (no rescaling).
pub fn laguerre_polys(n_max: usize, u: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut prev = 1.0;
    out.push(prev);
    if n_max == 0 {
        return out;
    }
    let mut cur = 1.0 - u;
    out.push(cur);
    for k in 1..n_max {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - u) * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
        out.push(cur);
    }
    out
}

/// Radial profile L_n(u) e^{-u/2} / √π evaluated at u = |x|².
pub fn radial_profile(n: usize, u: f64) -> f64 {
    let mut log_scale = -0.5 * u;
    let mut prev = 1.0;
    if n == 0 {
        return unscale(prev, log_scale) / PI.sqrt();
    }
    let mut cur = 1.0 - u;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - u) * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_ABOVE {
            prev /= RESCALE_ABOVE;
            cur /= RESCALE_ABOVE;
            log_scale += LN_RESCALE;
        }
    }
    unscale(cur, log_scale) / PI.sqrt()
}

/// |φ_n^{hol}| at radius r, computed as exp(n ln r − r²/2 − ½ ln n! − ½ ln π).
pub fn holomorphic_modulus(n: usize, r: f64) -> f64 {
    if r == 0.0 {
        return if n == 0 { 1.0 / PI.sqrt() } else { 0.0 };
    }
    let nf = n as f64;
    (nf * r.ln() - 0.5 * r * r - 0.5 * ln_factorial(n) - 0.5 * PI.ln()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ground_state_at_origin() {
        assert_relative_eq!(eval_hermite_1d(0, 0.0).unwrap(), PI.powf(-0.25), epsilon = 1e-15);
        assert_eq!(eval_hermite_1d(1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn matches_explicit_low_order() {
        // h_2(x) = (2x² − 1) e^{-x²/2} / (√2 π^{1/4})
        for &x in &[-2.3, -0.4, 0.0, 0.7, 3.1] {
            let expected = (2.0 * x * x - 1.0) * (-x * x / 2.0_f64).exp() / (2.0f64.sqrt() * PI.powf(0.25));
            assert_relative_eq!(eval_hermite_1d(2, x).unwrap(), expected, epsilon = 1e-14);
        }
    }

    #[test]
    fn parity_is_exact() {
        for n in 0..60 {
            for &x in &[0.3, 1.7, 5.2, 11.0, 40.0] {
                let a = eval_hermite_1d(n, x).unwrap();
                let b = eval_hermite_1d(n, -x).unwrap();
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                assert_eq!(a, sign * b);
            }
        }
    }

    #[test]
    fn deep_tail_underflows_to_zero() {
        assert_eq!(eval_hermite_1d(3, 60.0).unwrap(), 0.0);
        // large n keeps the turning point far out, the value must stay finite
        let v = eval_hermite_1d(2000, 60.0).unwrap();
        assert!(v.is_finite() && v != 0.0);
    }

    #[test]
    fn huge_abscissa_is_an_error() {
        assert!(matches!(eval_hermite_1d(4, 1e200), Err(Error::HermiteOverflow { .. })));
        assert!(eval_hermite_1d(4, f64::NAN).is_err());
    }

    #[test]
    fn radial_profile_agrees_with_unscaled_laguerre() {
        for n in 0..12 {
            for &u in &[0.0, 0.5, 3.0, 9.0] {
                let direct = laguerre_polys(n, u)[n] * (-u / 2.0).exp() / PI.sqrt();
                assert_relative_eq!(radial_profile(n, u), direct, epsilon = 1e-12, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn holomorphic_modulus_small_n() {
        let r: f64 = 1.3;
        let expected = r.powi(3) * (-r * r / 2.0).exp() / (PI * 6.0).sqrt();
        assert_relative_eq!(holomorphic_modulus(3, r), expected, max_relative = 1e-14);
    }
}
