//! Random initial data: the eigenspace measure μ_N, the Gaussian measure μ_⋆,
//! the Gibbs measure ρ_β and white noise, all on a fixed spectral cutoff.

mod tails;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::BasisFamily;
use crate::coupling::{build_tensor, CouplingTensor};
use crate::dynamics::{hamiltonian, CoefficientState, Projector, ProjectorKind};
use crate::error::{Error, Result};
use crate::stats::{mean_stderr, MeanEstimate};

pub use tails::{tail_study, Functional, LambdaGrid, TailCurve, TailPoint};

/// Attempts per sample before the rejection sampler gives up.
pub const REJECTION_WINDOW: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureKind {
    Eigenspace,
    GaussianFree,
    Gibbs,
    WhiteNoise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "method")]
pub enum GibbsSampler {
    Rejection,
    /// Independence Metropolis with the Gaussian measure as proposal; each
    /// sample runs its own chain of `steps` proposals.
    IndependenceMetropolis {
        steps: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    pub kind: MeasureKind,
    pub family: BasisFamily,
    pub cutoff: usize,
    #[serde(default)]
    pub beta: f64,
    pub seed: u64,
    /// Cutoff applied inside the Gibbs weight e^{−βH(S c)}.
    #[serde(default = "default_gibbs_projector")]
    pub gibbs_projector: ProjectorKind,
    #[serde(default = "default_gibbs_sampler")]
    pub gibbs_sampler: GibbsSampler,
    /// Unlocks white noise on the radial chain (no invariance claim).
    #[serde(default)]
    pub experimental: bool,
}

fn default_gibbs_projector() -> ProjectorKind {
    ProjectorKind::Smooth
}

fn default_gibbs_sampler() -> GibbsSampler {
    GibbsSampler::Rejection
}

impl MeasureSpec {
    pub fn new(kind: MeasureKind, family: BasisFamily, cutoff: usize, seed: u64) -> Self {
        Self {
            kind,
            family,
            cutoff,
            beta: 0.0,
            seed,
            gibbs_projector: ProjectorKind::Smooth,
            gibbs_sampler: GibbsSampler::Rejection,
            experimental: false,
        }
    }

    pub fn eigenspace(level: usize, seed: u64) -> Self {
        Self::new(MeasureKind::Eigenspace, BasisFamily::Eigenspace { level }, level, seed)
    }

    pub fn gaussian_free(family: BasisFamily, cutoff: usize, seed: u64) -> Self {
        Self::new(MeasureKind::GaussianFree, family, cutoff, seed)
    }

    pub fn white_noise(cutoff: usize, seed: u64) -> Self {
        Self::new(MeasureKind::WhiteNoise, BasisFamily::Holomorphic, cutoff, seed)
    }

    pub fn gibbs(family: BasisFamily, cutoff: usize, beta: f64, seed: u64) -> Self {
        Self { beta, ..Self::new(MeasureKind::Gibbs, family, cutoff, seed) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::Config(format!("beta must be finite and ≥ 0, got {}", self.beta)));
        }
        if self.beta != 0.0 && self.kind != MeasureKind::Gibbs {
            return Err(Error::Config(format!("beta is only meaningful for gibbs, not {:?}", self.kind)));
        }
        match (self.kind, self.family) {
            (MeasureKind::Eigenspace, BasisFamily::Eigenspace { level }) => {
                if level != self.cutoff {
                    return Err(Error::Config(format!("eigenspace level {level} differs from cutoff {}", self.cutoff)));
                }
            }
            (MeasureKind::Eigenspace, f) => {
                return Err(Error::Config(format!("eigenspace measure needs an eigenspace family, got {f}")))
            }
            (_, BasisFamily::Eigenspace { .. }) => {
                return Err(Error::Config(format!(
                    "{:?} measure is defined on the holomorphic or radial chain",
                    self.kind
                )))
            }
            (MeasureKind::WhiteNoise, BasisFamily::Radial) if !self.experimental => {
                return Err(Error::Config(
                    "white noise on the radial chain is experimental (enable `experimental`)".into(),
                ))
            }
            _ => {}
        }
        if self.kind == MeasureKind::Gibbs && self.gibbs_projector == ProjectorKind::Smooth && self.cutoff == 0 {
            return Err(Error::Config(
                "a smooth cutoff at N = 0 removes the only mode; use the sharp projector".into(),
            ));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.family.max_index(self.cutoff) + 1
    }

    pub fn gibbs_projector(&self) -> Projector {
        Projector { kind: self.gibbs_projector, cutoff: self.cutoff }
    }
}

/// Independent standard complex Gaussians with density e^{−|z|²}/π: real and
/// imaginary parts each N(0, ½).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianDraw {
    pub g: Vec<Complex64>,
}

impl GaussianDraw {
    pub fn draw<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let g = (0..dim)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re * s, im * s)
            })
            .collect();
        Self { g }
    }
}

/// Independent random stream for sample `index` under `seed`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Stateless sampler: sample `i` depends only on (spec, i).
pub struct Sampler {
    spec: MeasureSpec,
    scale: Vec<f64>,
    gibbs: Option<GibbsWeight>,
}

struct GibbsWeight {
    tensor: CouplingTensor,
    chi: Vec<f64>,
}

impl GibbsWeight {
    fn log_weight(&self, beta: f64, c: &[Complex64], family: BasisFamily) -> Result<f64> {
        let projected: Vec<Complex64> = c.iter().zip(&self.chi).map(|(a, w)| a * w).collect();
        let state = CoefficientState { family, coeffs: projected, time: 0.0 };
        Ok(-beta * hamiltonian(&state, &self.tensor)?)
    }
}

impl Sampler {
    pub fn new(spec: MeasureSpec) -> Result<Self> {
        spec.validate()?;
        let tensor = if spec.kind == MeasureKind::Gibbs && spec.beta > 0.0 {
            Some(build_tensor(spec.family, spec.cutoff)?)
        } else {
            None
        };
        Self::assemble(spec, tensor)
    }

    /// Reuse an existing tensor for the Gibbs weight.
    pub fn with_tensor(spec: MeasureSpec, tensor: &CouplingTensor) -> Result<Self> {
        spec.validate()?;
        if tensor.family() != spec.family || tensor.dim() != spec.dim() {
            return Err(Error::DimensionMismatch(format!(
                "tensor ({}, N={}) does not match measure ({}, N={})",
                tensor.family(),
                tensor.cutoff(),
                spec.family,
                spec.cutoff
            )));
        }
        let tensor = (spec.kind == MeasureKind::Gibbs && spec.beta > 0.0).then(|| tensor.clone());
        Self::assemble(spec, tensor)
    }

    fn assemble(spec: MeasureSpec, tensor: Option<CouplingTensor>) -> Result<Self> {
        let dim = spec.dim();
        let scale = match spec.kind {
            MeasureKind::Eigenspace => vec![1.0 / (dim as f64).sqrt(); dim],
            MeasureKind::WhiteNoise => vec![1.0; dim],
            MeasureKind::GaussianFree | MeasureKind::Gibbs => {
                (0..dim).map(|n| 1.0 / spec.family.eigenvalue(n).sqrt()).collect()
            }
        };
        let gibbs = tensor.map(|tensor| {
            let chi = spec.gibbs_projector().weights(spec.family, dim);
            GibbsWeight { tensor, chi }
        });
        Ok(Self { spec, scale, gibbs })
    }

    pub fn spec(&self) -> &MeasureSpec {
        &self.spec
    }

    fn proposal<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Complex64> {
        let g = GaussianDraw::draw(rng, self.scale.len()).g;
        g.into_iter().zip(&self.scale).map(|(g, s)| g * s).collect()
    }

    pub fn sample(&self, index: u64) -> Result<CoefficientState> {
        let mut rng = stream_rng(self.spec.seed, index);
        let coeffs = match &self.gibbs {
            None => self.proposal(&mut rng),
            Some(w) => match self.spec.gibbs_sampler {
                GibbsSampler::Rejection => self.rejection(w, &mut rng)?,
                GibbsSampler::IndependenceMetropolis { steps } => self.metropolis(w, &mut rng, steps)?,
            },
        };
        Ok(CoefficientState { family: self.spec.family, coeffs, time: 0.0 })
    }

    fn rejection(&self, w: &GibbsWeight, rng: &mut ChaCha8Rng) -> Result<Vec<Complex64>> {
        for _ in 0..REJECTION_WINDOW {
            let c = self.proposal(rng);
            let u: f64 = rng.random();
            if u.ln() < w.log_weight(self.spec.beta, &c, self.spec.family)? {
                return Ok(c);
            }
        }
        Err(Error::RejectionStall { accepted: 0, attempts: REJECTION_WINDOW })
    }

    fn metropolis(&self, w: &GibbsWeight, rng: &mut ChaCha8Rng, steps: u32) -> Result<Vec<Complex64>> {
        let mut x = self.proposal(rng);
        let mut lx = w.log_weight(self.spec.beta, &x, self.spec.family)?;
        for _ in 0..steps {
            let y = self.proposal(rng);
            let ly = w.log_weight(self.spec.beta, &y, self.spec.family)?;
            let u: f64 = rng.random();
            if u.ln() < ly - lx {
                x = y;
                lx = ly;
            }
        }
        Ok(x)
    }

    /// Samples `start..start + count`, in index order.
    pub fn sample_range(&self, start: u64, count: u64) -> Result<Vec<CoefficientState>> {
        (start..start + count).into_par_iter().map(|i| self.sample(i)).collect()
    }
}

/// One sample of `spec` at index 0.
pub fn sample(spec: &MeasureSpec) -> Result<CoefficientState> {
    Sampler::new(*spec)?.sample(0)
}

/// −β·H(c), the unnormalized Gibbs log-weight relative to μ_⋆.
pub fn log_density_ratio(state: &CoefficientState, beta: f64, tensor: &CouplingTensor) -> Result<f64> {
    if !(beta >= 0.0) {
        return Err(Error::Config(format!("beta must be ≥ 0, got {beta}")));
    }
    if beta == 0.0 {
        return Ok(0.0);
    }
    Ok(-beta * hamiltonian(state, tensor)?)
}

/// Monte Carlo estimate of E_{μ_⋆}[e^{−βH(S c)}] = 1/C_β^N.
pub fn estimate_partition(spec: &MeasureSpec, n_samples: usize) -> Result<MeanEstimate> {
    if n_samples < 100 {
        return Err(Error::Config(format!("partition estimate needs ≥ 100 samples, got {n_samples}")));
    }
    if spec.kind != MeasureKind::Gibbs {
        return Err(Error::Config("partition estimate needs a gibbs spec".into()));
    }
    spec.validate()?;
    if spec.beta == 0.0 {
        return Ok(MeanEstimate { mean: 1.0, stderr: 0.0, count: n_samples });
    }
    let base = MeasureSpec { kind: MeasureKind::GaussianFree, beta: 0.0, ..*spec };
    let proposal = Sampler::new(base)?;
    let tensor = build_tensor(spec.family, spec.cutoff)?;
    let weight = GibbsWeight { chi: spec.gibbs_projector().weights(spec.family, spec.dim()), tensor };
    let values: Vec<f64> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let s = proposal.sample(i)?;
            Ok(weight.log_weight(spec.beta, &s.coeffs, spec.family)?.exp())
        })
        .collect::<Result<_>>()?;
    Ok(mean_stderr(&values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{mass, sobolev_norm};
    use std::f64::consts::PI;

    const HOL: BasisFamily = BasisFamily::Holomorphic;

    #[test]
    fn determinism_and_stream_independence() {
        let s = Sampler::new(MeasureSpec::white_noise(8, 7)).unwrap();
        assert_eq!(s.sample(3).unwrap(), s.sample(3).unwrap());
        assert_ne!(s.sample(3).unwrap(), s.sample(4).unwrap());
        let other = Sampler::new(MeasureSpec::white_noise(8, 8)).unwrap();
        assert_ne!(s.sample(3).unwrap(), other.sample(3).unwrap());
        let batch = s.sample_range(0, 6).unwrap();
        assert_eq!(batch[3], s.sample(3).unwrap());
    }

    #[test]
    fn white_noise_second_moment() {
        let n = 10_000u64;
        let s = Sampler::new(MeasureSpec::white_noise(4, 1)).unwrap();
        let draws = s.sample_range(0, n).unwrap();
        for mode in 0..5 {
            let v: Vec<f64> = draws.iter().map(|d| d.coeffs[mode].norm_sqr()).collect();
            let m = mean_stderr(&v);
            assert!((m.mean - 1.0).abs() < 3.0 * m.stderr.max(0.01), "mode {mode}: {m:?}");
        }
    }

    #[test]
    fn eigenspace_mass_has_unit_mean() {
        let s = Sampler::new(MeasureSpec::eigenspace(6, 2)).unwrap();
        let v: Vec<f64> = s.sample_range(0, 5000).unwrap().iter().map(mass).collect();
        let m = mean_stderr(&v);
        assert!((m.mean - 1.0).abs() < 4.0 * m.stderr);
    }

    #[test]
    fn gaussian_free_negative_sobolev_moment() {
        let cutoff = 12;
        let s = Sampler::new(MeasureSpec::gaussian_free(HOL, cutoff, 3)).unwrap();
        let draws = s.sample_range(0, 10_000).unwrap();
        for sigma in [0.1, 0.5, 1.0] {
            let v: Vec<f64> = draws.iter().map(|d| sobolev_norm(d, -sigma).powi(2)).collect();
            let m = mean_stderr(&v);
            let expected: f64 = (0..=cutoff).map(|n| HOL.eigenvalue(n).powf(-sigma - 1.0)).sum();
            assert!((m.mean - expected).abs() < 3.0 * m.stderr, "σ={sigma}: {m:?} vs {expected}");
        }
    }

    #[test]
    fn gibbs_at_zero_beta_is_gaussian_free() {
        let g = Sampler::new(MeasureSpec::gibbs(HOL, 8, 0.0, 5)).unwrap();
        let f = Sampler::new(MeasureSpec::gaussian_free(HOL, 8, 5)).unwrap();
        assert_eq!(g.sample(11).unwrap(), f.sample(11).unwrap());
    }

    #[test]
    fn spec_validation() {
        assert!(MeasureSpec::gibbs(HOL, 4, -1.0, 0).validate().is_err());
        assert!(MeasureSpec { beta: 1.0, ..MeasureSpec::white_noise(4, 0) }.validate().is_err());
        assert!(MeasureSpec::new(MeasureKind::WhiteNoise, BasisFamily::Radial, 4, 0).validate().is_err());
        let exp =
            MeasureSpec { experimental: true, ..MeasureSpec::new(MeasureKind::WhiteNoise, BasisFamily::Radial, 4, 0) };
        assert!(exp.validate().is_ok());
        assert!(MeasureSpec::new(MeasureKind::Eigenspace, HOL, 4, 0).validate().is_err());
        assert!(MeasureSpec::new(MeasureKind::GaussianFree, BasisFamily::Eigenspace { level: 3 }, 3, 0)
            .validate()
            .is_err());
        assert!(MeasureSpec::gibbs(HOL, 0, 1.0, 0).validate().is_err());
    }

    #[test]
    fn density_ratio() {
        let t = build_tensor(HOL, 3).unwrap();
        let s = CoefficientState::single_mode(HOL, 3, 0, Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!(log_density_ratio(&s, 0.0, &t).unwrap(), 0.0);
        assert!((log_density_ratio(&s, 1.0, &t).unwrap() + PI / 8.0).abs() < 1e-15);
        assert!(log_density_ratio(&s, 2.0, &t).unwrap() < log_density_ratio(&s, 1.0, &t).unwrap());
    }

    #[test]
    fn partition_bounds() {
        let zero = estimate_partition(&MeasureSpec::gibbs(HOL, 8, 0.0, 1), 100).unwrap();
        assert_eq!((zero.mean, zero.stderr), (1.0, 0.0));
        let z = estimate_partition(&MeasureSpec::gibbs(HOL, 8, 1.0, 1), 2000).unwrap();
        assert!(z.mean > 0.0 && z.mean <= 1.0);
        assert!(estimate_partition(&MeasureSpec::gibbs(HOL, 8, 1.0, 1), 50).is_err());
    }

    #[test]
    fn metropolis_fallback_runs() {
        let spec = MeasureSpec {
            gibbs_sampler: GibbsSampler::IndependenceMetropolis { steps: 50 },
            ..MeasureSpec::gibbs(HOL, 6, 2.0, 4)
        };
        let s = Sampler::new(spec).unwrap();
        assert_eq!(s.sample(2).unwrap(), s.sample(2).unwrap());
    }
}
