use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::hermite_functions;
use crate::dynamics::field::{eigenspace_field_from_table, hermite_table};
use crate::dynamics::mass;
use crate::error::{Error, Result};
use crate::measures::{MeasureSpec, Sampler};
use crate::stats::quantile;

const SELF_CHECK_TOL: f64 = 1e-3;
/// Grid maxima handed to the local optimizer.
const PEAKS_REFINED: usize = 8;
const MAX_REFINE_STEPS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcentrationConfig {
    pub levels: Vec<usize>,
    pub n_samples: usize,
    pub seed: u64,
    /// Grid samples per local wavelength 2π/√λ.
    pub points_per_wavelength: f64,
    /// Margin added to the turning point √(2N + 1) to get the half-width.
    pub margin: f64,
    /// Band [c₁, c₂] for the normalized ratio.
    pub band: [f64; 2],
}

impl Default for ConcentrationConfig {
    fn default() -> Self {
        Self {
            levels: vec![16, 32, 64, 128],
            n_samples: 1000,
            seed: 0,
            points_per_wavelength: 6.0,
            margin: 4.0,
            band: [0.55, 0.70],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub level: usize,
    /// N^{−1/2}(ln N)^{1/2}; 1 for N < 2 where it degenerates.
    pub normalization: f64,
    pub grid_points: usize,
    pub q05: f64,
    pub median: f64,
    pub q95: f64,
    pub out_of_band: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub config: ConcentrationConfig,
    pub rows: Vec<LevelRow>,
    /// max median / min median across levels.
    pub median_spread: f64,
    pub out_of_band_non_increasing: bool,
    /// Relative change of the sup norm on a grid of twice the resolution,
    /// for one sample at the largest level.
    pub refinement_check: f64,
    pub band_stable: bool,
}

struct EigenGrid {
    level: usize,
    coords: Vec<f64>,
    spacing: f64,
    table: Array2<f64>,
}

impl EigenGrid {
    fn new(level: usize, points_per_wavelength: f64, margin: f64) -> Result<Self> {
        let half = (2.0 * level as f64 + 1.0).sqrt() + margin;
        let wavelength = 2.0 * std::f64::consts::PI / (2.0 * level as f64 + 2.0).sqrt();
        let points = ((2.0 * half / wavelength * points_per_wavelength).ceil() as usize + 1).max(65);
        Self::with_points(level, half, points)
    }

    fn with_points(level: usize, half: f64, points: usize) -> Result<Self> {
        let spacing = 2.0 * half / (points - 1) as f64;
        let coords: Vec<f64> = (0..points).map(|i| -half + i as f64 * spacing).collect();
        let table = hermite_table(level, &coords)?;
        Ok(Self { level, coords, spacing, table })
    }

    fn refined(&self) -> Result<Self> {
        let half = -self.coords[0];
        Self::with_points(self.level, half, 2 * self.coords.len() - 1)
    }

    /// Refined sup |u| and the grid mass Σ|u|²h².
    fn sup(&self, coeffs: &[Complex64]) -> Result<(f64, f64)> {
        let (re, im) = eigenspace_field_from_table(&self.table, coeffs);
        let p = self.coords.len();
        let modsq = |i: usize, j: usize| re[[i, j]].powi(2) + im[[i, j]].powi(2);
        let grid_mass: f64 = re.iter().zip(im.iter()).map(|(a, b)| a * a + b * b).sum::<f64>() * self.spacing.powi(2);
        let mut peaks: Vec<(f64, usize, usize)> = Vec::new();
        for i in 1..p - 1 {
            for j in 1..p - 1 {
                let v = modsq(i, j);
                let is_max = (i - 1..=i + 1).all(|a| (j - 1..=j + 1).all(|b| (a, b) == (i, j) || modsq(a, b) <= v));
                if is_max {
                    peaks.push((v, i, j));
                }
            }
        }
        peaks.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut best = peaks.first().map(|p| p.0.sqrt()).unwrap_or(0.0);
        for &(_, i, j) in peaks.iter().take(PEAKS_REFINED) {
            best = best.max(refine_peak(self.level, coeffs, [self.coords[i], self.coords[j]], self.spacing)?);
        }
        Ok((best, grid_mass))
    }
}

/// u and its first and second partial derivatives at x, from
/// h_k' = √(k/2) h_{k−1} − √((k+1)/2) h_{k+1} and h_k'' = (x² − 2k − 1) h_k.
fn point_jet(level: usize, coeffs: &[Complex64], x: [f64; 2]) -> Result<[Complex64; 6]> {
    let jet = |t: f64| -> Result<[Vec<f64>; 3]> {
        let h = hermite_functions(level + 1, t)?;
        let d1 = (0..=level)
            .map(|k| {
                let down = if k > 0 { (k as f64 / 2.0).sqrt() * h[k - 1] } else { 0.0 };
                down - ((k as f64 + 1.0) / 2.0).sqrt() * h[k + 1]
            })
            .collect();
        let d2 = (0..=level).map(|k| (t * t - 2.0 * k as f64 - 1.0) * h[k]).collect();
        Ok([h, d1, d2])
    };
    let [a, a1, a2] = jet(x[0])?;
    let [b, b1, b2] = jet(x[1])?;
    let mut out = [Complex64::default(); 6];
    for (k, c) in coeffs.iter().enumerate() {
        let m = level - k;
        out[0] += c * (a[k] * b[m]);
        out[1] += c * (a1[k] * b[m]);
        out[2] += c * (a[k] * b1[m]);
        out[3] += c * (a2[k] * b[m]);
        out[4] += c * (a1[k] * b1[m]);
        out[5] += c * (a[k] * b2[m]);
    }
    Ok(out)
}

/// Damped Newton ascent of |u|² from a grid maximum, steps capped at h.
fn refine_peak(level: usize, coeffs: &[Complex64], start: [f64; 2], h: f64) -> Result<f64> {
    let mut x = start;
    let mut j = point_jet(level, coeffs, x)?;
    let mut f = j[0].norm_sqr();
    for _ in 0..MAX_REFINE_STEPS {
        let [u, u1, u2, u11, u12, u22] = j;
        let g = [2.0 * (u.conj() * u1).re, 2.0 * (u.conj() * u2).re];
        let h11 = 2.0 * ((u1.conj() * u1).re + (u.conj() * u11).re);
        let h12 = 2.0 * ((u1.conj() * u2).re + (u.conj() * u12).re);
        let h22 = 2.0 * ((u2.conj() * u2).re + (u.conj() * u22).re);
        let det = h11 * h22 - h12 * h12;
        let mut step = if h11 < 0.0 && det > 0.0 {
            [-(h22 * g[0] - h12 * g[1]) / det, -(h11 * g[1] - h12 * g[0]) / det]
        } else {
            let gn = (g[0] * g[0] + g[1] * g[1]).sqrt().max(f64::MIN_POSITIVE);
            [0.1 * h * g[0] / gn, 0.1 * h * g[1] / gn]
        };
        let len = step[0].hypot(step[1]);
        if len > h {
            step = [step[0] * h / len, step[1] * h / len];
        }
        let mut accepted = false;
        for _ in 0..40 {
            let y = [x[0] + step[0], x[1] + step[1]];
            let jy = point_jet(level, coeffs, y)?;
            if jy[0].norm_sqr() >= f {
                x = y;
                j = jy;
                f = jy[0].norm_sqr();
                accepted = true;
                break;
            }
            step = [step[0] / 2.0, step[1] / 2.0];
        }
        if !accepted || step[0].hypot(step[1]) < 1e-12 {
            break;
        }
    }
    Ok(f.sqrt())
}

/// Sup norm of u = Σ c_k h_k(x1) h_{N−k}(x2): grid scan, then local refinement
/// of the highest grid maxima.
pub fn sup_norm_eigenspace(coeffs: &[Complex64], points_per_wavelength: f64, margin: f64) -> Result<f64> {
    let level = coeffs.len() - 1;
    Ok(EigenGrid::new(level, points_per_wavelength, margin)?.sup(coeffs)?.0)
}

fn normalization(level: usize) -> f64 {
    if level < 2 {
        1.0
    } else {
        let n = level as f64;
        (n.ln() / n).sqrt()
    }
}

/// Quantiles of r_N = ‖u‖_∞ / (N^{−1/2}(ln N)^{1/2} ‖u‖_{L²}) under μ_N.
pub fn concentration_study(config: &ConcentrationConfig) -> Result<ConcentrationReport> {
    if config.levels.is_empty() || config.n_samples == 0 {
        return Err(Error::Config("concentration needs at least one level and one sample".into()));
    }
    if !(config.band[0] > 0.0 && config.band[1] > config.band[0]) {
        return Err(Error::Config(format!("band must satisfy 0 < c1 < c2, got {:?}", config.band)));
    }
    if !(config.points_per_wavelength >= 2.0 && config.margin >= 0.0) {
        return Err(Error::Config("need ≥ 2 points per wavelength and a nonnegative margin".into()));
    }
    let largest = *config.levels.iter().max().unwrap();
    let mut rows = Vec::new();
    let mut refinement_check = 0.0;
    for &level in &config.levels {
        let grid = EigenGrid::new(level, config.points_per_wavelength, config.margin)?;
        let sampler = Sampler::new(MeasureSpec::eigenspace(level, config.seed))?;
        let norm = normalization(level);
        let mut ratios: Vec<f64> = (0..config.n_samples as u64)
            .into_par_iter()
            .map(|i| {
                let s = sampler.sample(i)?;
                let m = mass(&s);
                let (sup, grid_mass) = grid.sup(&s.coeffs)?;
                let rel = (grid_mass - m).abs() / m;
                if rel > SELF_CHECK_TOL {
                    return Err(Error::GridInadequate { rel_diff: rel, tol: SELF_CHECK_TOL });
                }
                Ok(sup / m.sqrt() / norm)
            })
            .collect::<Result<_>>()?;
        if level == largest {
            let s = sampler.sample(0)?;
            let coarse = grid.sup(&s.coeffs)?.0;
            let fine = grid.refined()?.sup(&s.coeffs)?.0;
            refinement_check = (fine - coarse).abs() / fine;
            if refinement_check > SELF_CHECK_TOL {
                return Err(Error::GridInadequate { rel_diff: refinement_check, tol: SELF_CHECK_TOL });
            }
        }
        ratios.sort_by(f64::total_cmp);
        let outside = ratios.iter().filter(|&&r| r < config.band[0] || r > config.band[1]).count();
        rows.push(LevelRow {
            level,
            normalization: norm,
            grid_points: grid.coords.len(),
            q05: quantile(&ratios, 0.05),
            median: quantile(&ratios, 0.5),
            q95: quantile(&ratios, 0.95),
            out_of_band: outside as f64 / ratios.len() as f64,
        });
    }
    let max_med = rows.iter().map(|r| r.median).fold(f64::NEG_INFINITY, f64::max);
    let min_med = rows.iter().map(|r| r.median).fold(f64::INFINITY, f64::min);
    let median_spread = max_med / min_med;
    let mut by_level: Vec<&LevelRow> = rows.iter().collect();
    by_level.sort_by_key(|r| r.level);
    let non_increasing = by_level.windows(2).all(|w| w[1].out_of_band <= w[0].out_of_band);
    Ok(ConcentrationReport {
        config: config.clone(),
        median_spread,
        out_of_band_non_increasing: non_increasing,
        refinement_check,
        band_stable: median_spread < 2.0 && non_increasing,
        rows,
    })
}
