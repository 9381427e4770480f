use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::BasisFamily;
use crate::coupling::build_tensor;
use crate::dynamics::{Projector, RhsWorkspace};
use crate::error::{Error, Result};
use crate::measures::{MeasureSpec, Sampler};
use crate::stats::{least_squares, mean_stderr, MeanEstimate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CauchyConfig {
    pub sigma: f64,
    /// The larger cutoff N.
    pub cutoff: usize,
    /// Smaller cutoffs M, each ≤ N.
    pub m_values: Vec<usize>,
    pub n_samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyRow {
    pub m: usize,
    pub estimate: MeanEstimate,
    /// Paired difference to the next M: E[d_M] − E[d_{M'}] and its stderr.
    pub decrease_to_next: Option<MeanEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyReport {
    pub config: CauchyConfig,
    pub rows: Vec<CauchyRow>,
    /// Least-squares slope of ln E[d_M] against ln M (M ≥ 1, nonzero estimates).
    pub log_log_slope: Option<f64>,
    /// Every step to a larger M decreases by more than 2 paired stderr.
    pub monotone: bool,
}

/// E‖T_N(u) − T_M(u)‖²_{H^{−σ}} under white noise, T_K(u) = Π_K T(Π_K u).
pub fn cauchy_study(config: &CauchyConfig) -> Result<CauchyReport> {
    if !(config.sigma > 1.0) {
        return Err(Error::Config(format!("sigma must exceed 1, got {}", config.sigma)));
    }
    if let Some(&m) = config.m_values.iter().find(|&&m| m > config.cutoff) {
        return Err(Error::Config(format!("M = {m} exceeds N = {}", config.cutoff)));
    }
    if config.m_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("M values must be strictly increasing".into()));
    }
    let n = config.cutoff;
    let family = BasisFamily::Holomorphic;
    let tensor = build_tensor(family, n)?;
    let sampler = Sampler::new(MeasureSpec::white_noise(n, config.seed))?;
    let weights: Vec<f64> = (0..=n).map(|p| family.eigenvalue(p).powf(-config.sigma)).collect();

    // rows: samples, columns: M values
    let table: Vec<Vec<f64>> = (0..config.n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let u = sampler.sample(i)?;
            let mut full = vec![Complex64::default(); n + 1];
            RhsWorkspace::new(&tensor, &Projector::sharp(n)).projected_nonlinearity(&tensor, &u.coeffs, &mut full);
            let mut part = vec![Complex64::default(); n + 1];
            Ok(config
                .m_values
                .iter()
                .map(|&m| {
                    RhsWorkspace::new(&tensor, &Projector::sharp(m))
                        .projected_nonlinearity(&tensor, &u.coeffs, &mut part);
                    full.iter().zip(&part).zip(&weights).map(|((a, b), w)| w * (a - b).norm_sqr()).sum()
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let column = |j: usize| -> Vec<f64> { table.iter().map(|r| r[j]).collect() };
    let mut rows = Vec::new();
    let mut monotone = true;
    for (j, &m) in config.m_values.iter().enumerate() {
        let decrease = (j + 1 < config.m_values.len()).then(|| {
            let d: Vec<f64> = table.iter().map(|r| r[j] - r[j + 1]).collect();
            mean_stderr(&d)
        });
        if let Some(d) = &decrease {
            monotone &= d.mean > 2.0 * d.stderr && d.mean > 0.0;
        }
        rows.push(CauchyRow { m, estimate: mean_stderr(&column(j)), decrease_to_next: decrease });
    }
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.m >= 1 && r.estimate.mean > 0.0)
        .map(|r| ((r.m as f64).ln(), r.estimate.mean.ln()))
        .collect();
    let log_log_slope = (points.len() >= 2).then(|| {
        let design: Vec<Vec<f64>> = points.iter().map(|p| vec![1.0, p.0]).collect();
        let y: Vec<f64> = points.iter().map(|p| p.1).collect();
        least_squares(&design, &y)[1]
    });
    Ok(CauchyReport { config: config.clone(), rows, log_log_slope, monotone })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(sigma: f64, m_values: Vec<usize>) -> CauchyConfig {
        CauchyConfig { sigma, cutoff: 16, m_values, n_samples: 200, seed: 5 }
    }

    #[test]
    fn equal_cutoffs_give_zero() {
        let r = cauchy_study(&cfg(1.5, vec![16])).unwrap();
        assert_eq!(r.rows[0].estimate.mean, 0.0);
    }

    #[test]
    fn heavier_smoothing_gives_smaller_values() {
        let a = cauchy_study(&cfg(1.5, vec![2, 4, 8])).unwrap();
        let b = cauchy_study(&cfg(3.0, vec![2, 4, 8])).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert!(y.estimate.mean < x.estimate.mean);
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(cauchy_study(&cfg(1.0, vec![4])).is_err());
        assert!(cauchy_study(&cfg(1.5, vec![32])).is_err());
        assert!(cauchy_study(&cfg(1.5, vec![8, 4])).is_err());
    }
}
