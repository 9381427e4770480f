use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{MeasureSpec, Sampler};
use crate::basis::Grid2D;
use crate::coupling::build_tensor;
use crate::dynamics::{eval_field, mass, spacetime_l4_fourth, CoefficientState, Projector, ProjectorKind};
use crate::error::{Error, Result};
use crate::stats::{weighted_linear_fit, LinearFit};

/// Minimum exceedance count at the largest λ.
pub const MIN_TOP_HITS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "name")]
pub enum Functional {
    /// ‖e^{−itH} S u‖_{L⁴([−π/4, π/4] × ℝ²)} with S the given cutoff.
    SpacetimeL4 {
        projector: ProjectorKind,
    },
    /// max |u| over a grid.
    SupOverGrid {
        grid: Grid2D,
    },
    L2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaGrid {
    /// `points` equally spaced levels from the sample median to the level
    /// still exceeded by MIN_TOP_HITS samples.
    Auto {
        points: usize,
    },
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub lambda: f64,
    pub exceed: usize,
    pub log_survival: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCurve {
    pub functional: Functional,
    pub n_samples: usize,
    pub points: Vec<TailPoint>,
    /// Weighted fit of log P(> λ) against λ², weights n·P/(1 − P).
    pub fit: LinearFit,
}

/// Empirical log-survival curve of a norm functional under `spec`.
pub fn tail_study(
    spec: &MeasureSpec,
    functional: Functional,
    grid: &LambdaGrid,
    n_samples: usize,
) -> Result<TailCurve> {
    let sampler = Sampler::new(*spec)?;
    let values = functional_values(&sampler, functional, n_samples)?;
    tail_curve(functional, values, grid)
}

type Evaluator<'a> = Box<dyn Fn(&CoefficientState) -> Result<f64> + Sync + 'a>;

pub(crate) fn functional_values(sampler: &Sampler, functional: Functional, n_samples: usize) -> Result<Vec<f64>> {
    let spec = sampler.spec();
    let eval: Evaluator = match functional {
        Functional::L2 => Box::new(|s| Ok(mass(s).sqrt())),
        Functional::SupOverGrid { grid } => Box::new(move |s| Ok(eval_field(s, &grid)?.max_modulus().0)),
        Functional::SpacetimeL4 { projector } => {
            let tensor = build_tensor(spec.family, spec.cutoff)?;
            let chi = Projector { kind: projector, cutoff: spec.cutoff }.weights(spec.family, spec.dim());
            Box::new(move |s| {
                let projected = CoefficientState {
                    family: s.family,
                    coeffs: s.coeffs.iter().zip(&chi).map(|(c, w)| c * w).collect(),
                    time: 0.0,
                };
                Ok(spacetime_l4_fourth(&projected, &tensor)?.max(0.0).powf(0.25))
            })
        }
    };
    (0..n_samples as u64).into_par_iter().map(|i| eval(&sampler.sample(i)?)).collect()
}

pub(crate) fn tail_curve(functional: Functional, mut values: Vec<f64>, grid: &LambdaGrid) -> Result<TailCurve> {
    let n = values.len();
    values.sort_by(f64::total_cmp);
    if n <= 2 * MIN_TOP_HITS {
        return Err(Error::InsufficientTail(format!("{n} samples cannot resolve a tail")));
    }
    let lambdas = match grid {
        LambdaGrid::Auto { points } => {
            let points = (*points).max(2);
            let lo = values[n / 2];
            let hi = values[n - MIN_TOP_HITS - 1];
            (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
        }
        LambdaGrid::Explicit(v) => v.clone(),
    };
    let mut points = Vec::with_capacity(lambdas.len());
    for &lambda in &lambdas {
        let exceed = n - values.partition_point(|&v| v <= lambda);
        let p = exceed as f64 / n as f64;
        points.push(TailPoint { lambda, exceed, log_survival: p.ln() });
    }
    let top = points.iter().map(|p| p.exceed).min().unwrap_or(0);
    if top < MIN_TOP_HITS {
        return Err(Error::InsufficientTail(format!(
            "largest λ has {top} exceedances, need {MIN_TOP_HITS}; add samples or lower the grid"
        )));
    }
    let usable: Vec<&TailPoint> = points.iter().filter(|p| p.exceed < n).collect();
    if usable.len() < 3 {
        return Err(Error::InsufficientTail("fewer than three λ levels inside the tail".into()));
    }
    let x: Vec<f64> = usable.iter().map(|p| p.lambda * p.lambda).collect();
    let y: Vec<f64> = usable.iter().map(|p| p.log_survival).collect();
    let w: Vec<f64> = usable
        .iter()
        .map(|p| {
            let q = p.exceed as f64 / n as f64;
            p.exceed as f64 / (1.0 - q)
        })
        .collect();
    let fit = weighted_linear_fit(&x, &y, &w);
    Ok(TailCurve { functional, n_samples: n, points, fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisFamily;
    use statrs::distribution::{ContinuousCDF, Gamma};

    #[test]
    fn l2_white_noise_matches_gamma_survival() {
        // ‖u‖² = Σ|g_n|² ~ Gamma(N + 1, 1)
        let cutoff = 7;
        let n = 20_000;
        let spec = MeasureSpec::white_noise(cutoff, 21);
        let curve = tail_study(&spec, Functional::L2, &LambdaGrid::Auto { points: 12 }, n).unwrap();
        let gamma = Gamma::new((cutoff + 1) as f64, 1.0).unwrap();
        for p in &curve.points {
            let exact = gamma.sf(p.lambda * p.lambda);
            let se = (exact * (1.0 - exact) / n as f64).sqrt();
            let emp = p.exceed as f64 / n as f64;
            assert!((emp - exact).abs() < 4.0 * se, "λ={}: {emp} vs {exact}", p.lambda);
        }
        assert!(curve.fit.slope < 0.0);
    }

    #[test]
    fn explicit_grid_too_far_out() {
        let spec = MeasureSpec::white_noise(3, 1);
        let r = tail_study(&spec, Functional::L2, &LambdaGrid::Explicit(vec![1.0, 2.0, 50.0]), 500);
        assert!(matches!(r, Err(Error::InsufficientTail(_))));
    }

    #[test]
    fn spacetime_functional_is_positive() {
        let spec = MeasureSpec::gaussian_free(BasisFamily::Holomorphic, 8, 2);
        let sampler = Sampler::new(spec).unwrap();
        let v = functional_values(&sampler, Functional::SpacetimeL4 { projector: ProjectorKind::Smooth }, 50).unwrap();
        assert!(v.iter().all(|x| *x > 0.0 && x.is_finite()));
    }
}
