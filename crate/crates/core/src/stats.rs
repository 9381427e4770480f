//! Small statistics toolkit for the Monte Carlo experiments.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

pub fn mean_stderr(xs: &[f64]) -> MeanEstimate {
    let n = xs.len();
    if n == 0 {
        return MeanEstimate { mean: f64::NAN, stderr: f64::NAN, count: 0 };
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = if n > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
    MeanEstimate { mean, stderr: (var / n as f64).sqrt(), count: n }
}

/// Difference of two independent means in units of their combined standard
/// error. Identical estimates give exactly 0.
pub fn z_score(a: &MeanEstimate, b: &MeanEstimate) -> f64 {
    let diff = b.mean - a.mean;
    if diff == 0.0 {
        return 0.0;
    }
    let se = (a.stderr * a.stderr + b.stderr * b.stderr).sqrt();
    if se == 0.0 {
        f64::INFINITY.copysign(diff)
    } else {
        diff / se
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic Kolmogorov
/// distribution and the Stephens small-sample correction.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n1, n2) = (x.len(), y.len());
    if n1 == 0 || n2 == 0 {
        return KsResult { statistic: 0.0, p_value: 1.0 };
    }
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n1 && j < n2 {
        let v = if x[i] <= y[j] { x[i] } else { y[j] };
        while i < n1 && x[i] <= v {
            i += 1;
        }
        while j < n2 && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n1 as f64 - j as f64 / n2 as f64).abs());
    }
    let en = ((n1 * n2) as f64 / (n1 + n2) as f64).sqrt();
    let p = kolmogorov_q((en + 0.12 + 0.11 / en) * d);
    KsResult { statistic: d, p_value: p }
}

/// Q_KS(λ) = 2 Σ_{j≥1} (−1)^{j−1} e^{−2j²λ²}.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let a = -2.0 * lambda * lambda;
    let mut sum = 0.0;
    let mut sign = 1.0;
    let mut prev = 0.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = sign * 2.0 * (a * jf * jf).exp();
        sum += term;
        if term.abs() <= 1e-12 * prev || term.abs() <= 1e-300 {
            return sum.clamp(0.0, 1.0);
        }
        sign = -sign;
        prev = term.abs();
    }
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub slope_stderr: f64,
}

/// Weighted least squares y ≈ a + b x; R² is the weighted coefficient of
/// determination.
pub fn weighted_linear_fit(x: &[f64], y: &[f64], w: &[f64]) -> LinearFit {
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for ((&xi, &yi), &wi) in x.iter().zip(y).zip(w) {
        sxx += wi * (xi - mx).powi(2);
        sxy += wi * (xi - mx) * (yi - my);
        syy += wi * (yi - my).powi(2);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).zip(w).map(|((&xi, &yi), &wi)| wi * (yi - intercept - slope * xi).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - rss / syy } else { 1.0 };
    let dof = x.len().saturating_sub(2).max(1) as f64;
    LinearFit { slope, intercept, r_squared, slope_stderr: (rss / dof / sxx).sqrt() }
}

/// Ordinary least squares y ≈ X β for a small design matrix (normal equations).
pub fn least_squares(design: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = design[0].len();
    let mut a = vec![vec![0.0; p + 1]; p];
    for (row, &yi) in design.iter().zip(y) {
        for i in 0..p {
            for j in 0..p {
                a[i][j] += row[i] * row[j];
            }
            a[i][p] += row[i] * yi;
        }
    }
    // Gaussian elimination with partial pivoting
    for col in 0..p {
        let piv = (col..p).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs())).unwrap();
        a.swap(col, piv);
        for r in 0..p {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=p {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    (0..p).map(|i| a[i][p] / a[i][i]).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson goodness of fit of observed counts against expected counts.
pub fn chi_square_gof(observed: &[u64], expected: &[f64]) -> ChiSquareTest {
    let statistic: f64 = observed.iter().zip(expected).map(|(&o, &e)| (o as f64 - e).powi(2) / e).sum();
    let dof = observed.len().saturating_sub(1).max(1);
    let p_value = ChiSquared::new(dof as f64).map(|d| d.sf(statistic)).unwrap_or(f64::NAN);
    ChiSquareTest { statistic, dof, p_value }
}

/// Empirical quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn mean_and_stderr() {
        let m = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert!((m.stderr - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn identical_samples_have_zero_z_and_unit_p() {
        let xs: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let m = mean_stderr(&xs);
        assert_eq!(z_score(&m, &m), 0.0);
        let ks = ks_two_sample(&xs, &xs);
        assert_eq!(ks.statistic, 0.0);
        assert_eq!(ks.p_value, 1.0);
    }

    #[test]
    fn kolmogorov_reference_values() {
        // tabulated: Q(1.36) ≈ 0.0494, Q(1.63) ≈ 0.0098
        assert!((kolmogorov_q(1.36) - 0.0494).abs() < 5e-4);
        assert!((kolmogorov_q(1.63) - 0.0098).abs() < 3e-4);
        assert!(kolmogorov_q(0.2) > 0.9999);
    }

    #[test]
    fn ks_detects_shift_and_accepts_same_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = Normal::new(0.0, 1.0).unwrap();
        let a: Vec<f64> = (0..2000).map(|_| n.sample(&mut rng)).collect();
        let b: Vec<f64> = (0..2000).map(|_| n.sample(&mut rng)).collect();
        let c: Vec<f64> = b.iter().map(|x| x + 0.3).collect();
        assert!(ks_two_sample(&a, &b).p_value > 0.001);
        assert!(ks_two_sample(&a, &c).p_value < 1e-6);
    }

    #[test]
    fn exact_line_fit() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, -1.0, -3.0, -5.0];
        let f = weighted_linear_fit(&x, &y, &[1.0, 2.0, 3.0, 4.0]);
        assert!((f.slope + 2.0).abs() < 1e-14 && (f.intercept - 1.0).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
    }

    #[test]
    fn least_squares_recovers_coefficients() {
        let design: Vec<Vec<f64>> = (1..10).map(|i| vec![1.0, i as f64, (i as f64).ln()]).collect();
        let y: Vec<f64> = design.iter().map(|r| 0.5 - 0.25 * r[1] + 2.0 * r[2]).collect();
        let b = least_squares(&design, &y);
        assert!((b[0] - 0.5).abs() < 1e-10 && (b[1] + 0.25).abs() < 1e-10 && (b[2] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn chi_square_perfect_fit() {
        let t = chi_square_gof(&[10, 20, 30], &[10.0, 20.0, 30.0]);
        assert_eq!(t.statistic, 0.0);
        assert!((t.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quantiles() {
        let s = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&s, 0.5), 3.0);
        assert_eq!(quantile(&s, 0.0), 1.0);
        assert_eq!(quantile(&s, 0.125), 1.5);
    }
}
