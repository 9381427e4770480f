use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::BasisFamily;
use crate::coupling::build_tensor;
use crate::dynamics::{mass, Integrator, IntegratorConfig, Projector};
use crate::error::{Error, Result};
use crate::measures::{MeasureSpec, Sampler};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecurrenceConfig {
    pub level: usize,
    pub t_max: f64,
    /// Spacing of the checkpoints where d(t) is recorded.
    pub dt: f64,
    /// Length of the windows over which the running minimum is reported.
    pub window: f64,
    pub n_samples: usize,
    pub seed: u64,
    /// Recurrence threshold as a fraction of ‖u_0‖.
    pub theta: f64,
    /// Desired fraction of recurring samples (reported, not enforced).
    pub target_fraction: f64,
    pub integrator: IntegratorConfig,
}

impl Default for RecurrenceConfig {
    fn default() -> Self {
        Self {
            level: 2,
            t_max: 1e4,
            dt: 0.25,
            window: 100.0,
            n_samples: 100,
            seed: 0,
            theta: 0.1,
            target_fraction: 0.8,
            integrator: IntegratorConfig {
                rel_tol: 1e-9,
                abs_tol: 1e-12,
                max_step: 0.25,
                ..IntegratorConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecurrence {
    pub index: u64,
    pub initial_norm: f64,
    /// First checkpoint with d ≥ θ‖u_0‖; None if the orbit never left the ball.
    pub departed_at: Option<f64>,
    /// First checkpoint after departure with d < θ‖u_0‖.
    pub recurred_at: Option<f64>,
    /// Smallest d after departure.
    pub min_distance: Option<f64>,
    /// Running minimum of d after departure, at the end of each window.
    pub running_min: Vec<f64>,
}

impl SampleRecurrence {
    pub fn recurred(&self) -> bool {
        self.departed_at.is_none() || self.recurred_at.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceReport {
    pub config: RecurrenceConfig,
    pub samples: Vec<SampleRecurrence>,
    pub fraction_recurred: f64,
    pub meets_target: bool,
    pub note: String,
}

/// d(t) = ‖Φ(t)u_0 − u_0‖ at checkpoints for samples of μ_N on E_N.
pub fn recurrence_experiment(config: &RecurrenceConfig) -> Result<RecurrenceReport> {
    config.integrator.validate()?;
    if !(config.dt > 0.0 && config.window >= config.dt && config.t_max >= config.dt && config.t_max.is_finite()) {
        return Err(Error::Config("recurrence needs 0 < dt ≤ window and dt ≤ t_max < ∞".into()));
    }
    if !(config.theta > 0.0) {
        return Err(Error::Config("theta must be positive".into()));
    }
    let family = BasisFamily::Eigenspace { level: config.level };
    let tensor = build_tensor(family, config.level)?;
    let proj = Projector::sharp(config.level);
    let sampler = Sampler::new(MeasureSpec::eigenspace(config.level, config.seed))?;
    let steps = (config.t_max / config.dt).round() as usize;
    let per_window = ((config.window / config.dt).round() as usize).max(1);

    let samples: Vec<SampleRecurrence> = (0..config.n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let u0 = sampler.sample(i)?;
            let norm = mass(&u0).sqrt();
            let threshold = config.theta * norm;
            let mut state = u0.clone();
            let mut integ = Integrator::new(&tensor, &proj, config.integrator)?;
            let mut rec = SampleRecurrence {
                index: i,
                initial_norm: norm,
                departed_at: None,
                recurred_at: None,
                min_distance: None,
                running_min: Vec::new(),
            };
            let mut running = f64::INFINITY;
            for k in 1..=steps {
                let t = k as f64 * config.dt;
                integ.advance_to(&mut state, t, |_| Ok(()))?;
                let d = state.distance(&u0);
                if rec.departed_at.is_none() {
                    if d >= threshold {
                        rec.departed_at = Some(t);
                    }
                } else {
                    running = running.min(d);
                    if rec.recurred_at.is_none() && d < threshold {
                        rec.recurred_at = Some(t);
                    }
                }
                if k % per_window == 0 || k == steps {
                    rec.running_min.push(running);
                }
            }
            rec.min_distance = running.is_finite().then_some(running);
            Ok(rec)
        })
        .collect::<Result<_>>()?;

    let recurred = samples.iter().filter(|s| s.recurred()).count();
    let fraction = recurred as f64 / samples.len().max(1) as f64;
    Ok(RecurrenceReport {
        config: *config,
        samples,
        fraction_recurred: fraction,
        meets_target: fraction >= config.target_fraction,
        note: "recurrence target and horizon are a desk-scale convention; recurrence is only guaranteed asymptotically".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{advance, CoefficientState};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn single_mode_is_periodic() {
        let family = BasisFamily::Eigenspace { level: 0 };
        let tensor = build_tensor(family, 0).unwrap();
        let c0 = Complex64::new(0.6, 0.8);
        let u0 = CoefficientState::new(family, vec![c0]).unwrap();
        // E_0 is spanned by the Gaussian, whose self-coupling is π/8
        let period = 2.0 * PI / (PI / 8.0 * c0.norm_sqr());
        let cfg = IntegratorConfig { rel_tol: 1e-12, abs_tol: 1e-14, ..IntegratorConfig::default() };
        let p = Projector::sharp(0);
        let half = advance(&u0, &tensor, &p, period / 2.0, &cfg).unwrap();
        assert!((half.distance(&u0) - 2.0).abs() < 1e-9);
        let full = advance(&u0, &tensor, &p, period, &cfg).unwrap();
        assert!(full.distance(&u0) < 1e-9);
    }

    #[test]
    fn running_minimum_is_monotone() {
        let cfg = RecurrenceConfig { t_max: 200.0, window: 20.0, n_samples: 6, seed: 4, ..RecurrenceConfig::default() };
        let r = recurrence_experiment(&cfg).unwrap();
        assert_eq!(r.samples.len(), 6);
        for s in &r.samples {
            assert_eq!(s.running_min.len(), 10);
            assert!(s.running_min.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn bad_config() {
        let cfg = RecurrenceConfig { dt: 0.0, ..RecurrenceConfig::default() };
        assert!(recurrence_experiment(&cfg).is_err());
    }
}
