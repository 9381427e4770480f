use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crlab::dynamics::ProjectorKind;
use crlab::measures::{GibbsSampler, MeasureKind, MeasureSpec, Sampler};

use super::{required, serde_value, Outcome};
use crate::config::{resolve, CliError, CliResult, FamilyArg, Provenance};

/// Measure flags shared by `sample`, `invariance` and `tails`.
#[derive(Debug, Args, Serialize)]
pub struct MeasureArgs {
    /// Basis family of the measure (ignored for the eigenspace measure).
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyArg>,
    /// Cutoff N, or the level of the eigenspace.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Inverse temperature (gibbs only).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Use independence Metropolis with this many steps instead of rejection (gibbs only).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metropolis_steps: Option<u32>,
    /// Allow measures that carry no invariance claim (radial white noise).
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub experimental: bool,
}

/// Builds a validated measure spec. The gibbs beta defaults to 1 and must
/// stay unset for the other kinds.
#[allow(clippy::too_many_arguments)]
pub fn measure_spec(
    kind: MeasureKind,
    family: FamilyArg,
    n: usize,
    beta: Option<f64>,
    seed: u64,
    gibbs_projector: ProjectorKind,
    metropolis_steps: Option<u32>,
    experimental: bool,
) -> CliResult<MeasureSpec> {
    let family = match kind {
        MeasureKind::Eigenspace => FamilyArg::Eig.family(n),
        _ => family.family(n),
    };
    let beta = match (kind, beta) {
        (MeasureKind::Gibbs, b) => b.unwrap_or(1.0),
        (_, None) => 0.0,
        (_, Some(b)) => return Err(CliError::Config(format!("beta: only meaningful for gibbs, got {b}"))),
    };
    let gibbs_sampler = match metropolis_steps {
        None => GibbsSampler::Rejection,
        Some(steps) => GibbsSampler::IndependenceMetropolis { steps },
    };
    let spec =
        MeasureSpec { beta, gibbs_projector, gibbs_sampler, experimental, ..MeasureSpec::new(kind, family, n, seed) };
    spec.validate()?;
    Ok(spec)
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    /// eigenspace | gaussian-free | gibbs | white-noise
    #[arg(long, value_parser = serde_value::<MeasureKind>)]
    #[serde(skip_serializing_if = "Option::is_none")]
    kind: Option<MeasureKind>,
    #[command(flatten)]
    #[serde(flatten)]
    measure: MeasureArgs,
    /// Cutoff inside the gibbs weight: sharp | smooth.
    #[arg(long, value_parser = serde_value::<ProjectorKind>)]
    #[serde(skip_serializing_if = "Option::is_none")]
    gibbs_projector: Option<ProjectorKind>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    count: Option<u64>,
    /// Index of the first sample (samples are addressable by index).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    start: Option<u64>,
    /// NDJSON output, one {index, coeffs} object per line.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleConfig {
    kind: MeasureKind,
    family: FamilyArg,
    n: usize,
    beta: Option<f64>,
    seed: u64,
    gibbs_projector: ProjectorKind,
    metropolis_steps: Option<u32>,
    experimental: bool,
    count: u64,
    start: u64,
    out: Option<PathBuf>,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self {
            kind: MeasureKind::GaussianFree,
            family: FamilyArg::Hol,
            n: 16,
            beta: None,
            seed: 0,
            gibbs_projector: ProjectorKind::Smooth,
            metropolis_steps: None,
            experimental: false,
            count: 1000,
            start: 0,
            out: None,
        }
    }
}

#[derive(Serialize)]
struct SampleLine<'a> {
    index: u64,
    coeffs: &'a [Complex64],
}

pub fn run(args: &SampleArgs, config: Option<&Path>) -> CliResult<Outcome> {
    let prov = Provenance::start();
    let mut c: SampleConfig = resolve("sample", config, args)?;
    let out = required(&c.out, "out")?;
    let spec =
        measure_spec(c.kind, c.family, c.n, c.beta, c.seed, c.gibbs_projector, c.metropolis_steps, c.experimental)?;
    if spec.kind == MeasureKind::Gibbs {
        c.beta = Some(spec.beta);
    }
    let sampler = Sampler::new(spec)?;
    let states = sampler.sample_range(c.start, c.count)?;
    let mut w = BufWriter::new(File::create(out)?);
    for (i, s) in states.iter().enumerate() {
        serde_json::to_writer(&mut w, &SampleLine { index: c.start + i as u64, coeffs: &s.coeffs })?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    prov.write(out, "sample", &c)?;
    Ok(Outcome::done(format!(
        "{} samples of {:?} on {} N={} -> {}",
        c.count,
        spec.kind,
        spec.family,
        spec.cutoff,
        out.display()
    )))
}
