use std::fs::File;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use crlab::basis::{lp_norm, Grid2D};
use crlab::coupling::proportionality_sweep;
use crlab::dynamics::ProjectorKind;
use crlab::measures::{tail_study, Functional, LambdaGrid, MeasureKind};

use super::sample::{measure_spec, MeasureArgs};
use super::{required, serde_value, Outcome};
use crate::config::{exponent, resolve, write_json, CliResult, FamilyArg, Provenance};

#[derive(Debug, Args, Serialize)]
pub struct NormsArgs {
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    family: Option<FamilyArg>,
    /// Eigenspace level (eig family only).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    /// Mode indices, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    indices: Option<Vec<usize>>,
    /// Exponents in [2, ∞], comma separated; "inf" for the sup norm.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "some_exponents")]
    p: Option<Vec<f64>>,
    /// CSV: family, index, p, value, error.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

fn some_exponents<S: serde::Serializer>(v: &Option<Vec<f64>>, s: S) -> Result<S::Ok, S::Error> {
    exponent::serialize(v.as_deref().unwrap_or_default(), s)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormsConfig {
    family: FamilyArg,
    n: usize,
    indices: Vec<usize>,
    #[serde(with = "exponent")]
    p: Vec<f64>,
    out: Option<PathBuf>,
}

impl Default for NormsConfig {
    fn default() -> Self {
        Self {
            family: FamilyArg::Hol,
            n: 0,
            indices: vec![0, 1, 2, 4, 8, 16, 32, 64],
            p: vec![4.0, f64::INFINITY],
            out: None,
        }
    }
}

#[derive(Serialize)]
struct NormRow {
    family: String,
    index: usize,
    p: String,
    value: f64,
    error: f64,
}

pub fn run_norms(args: &NormsArgs, config: Option<&Path>) -> CliResult<Outcome> {
    let prov = Provenance::start();
    let c: NormsConfig = resolve("norms", config, args)?;
    let out = required(&c.out, "out")?;
    let family = c.family.family(c.n);
    let mut w = csv::Writer::from_writer(File::create(out)?);
    for &index in &c.indices {
        family.validate_index(index)?;
        let grid = Grid2D::for_1d(family.eigenvalue(index));
        for &p in &c.p {
            let v = lp_norm(family, index, p, &grid)?;
            w.serialize(NormRow {
                family: family.tag(),
                index,
                p: if p.is_infinite() { "inf".into() } else { p.to_string() },
                value: v.value,
                error: v.error,
            })?;
        }
    }
    w.flush()?;
    prov.write(out, "norms", &c)?;
    Ok(Outcome::done(format!("{} norms of {family} -> {}", c.indices.len() * c.p.len(), out.display())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionalArg {
    L2,
    Sup,
    SpacetimeL4,
}

#[derive(Debug, Args, Serialize)]
pub struct TailsArgs {
    /// eigenspace | gaussian-free | gibbs | white-noise
    #[arg(long, value_parser = serde_value::<MeasureKind>)]
    #[serde(skip_serializing_if = "Option::is_none")]
    measure: Option<MeasureKind>,
    #[command(flatten)]
    #[serde(flatten)]
    measure_args: MeasureArgs,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    functional: Option<FunctionalArg>,
    /// Cutoff inside the space-time functional and the gibbs weight.
    #[arg(long, value_parser = serde_value::<ProjectorKind>)]
    #[serde(skip_serializing_if = "Option::is_none")]
    projector: Option<ProjectorKind>,
    /// Grid points per axis for the sup functional.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    grid_points: Option<usize>,
    /// Number of automatically placed λ levels.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_points: Option<usize>,
    /// Explicit λ levels, comma separated (overrides --lambda-points).
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    lambdas: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TailsConfig {
    measure: MeasureKind,
    family: FamilyArg,
    n: usize,
    beta: Option<f64>,
    seed: u64,
    metropolis_steps: Option<u32>,
    experimental: bool,
    functional: FunctionalArg,
    projector: ProjectorKind,
    grid_points: usize,
    lambda_points: usize,
    lambdas: Option<Vec<f64>>,
    samples: usize,
    report: Option<PathBuf>,
}

impl Default for TailsConfig {
    fn default() -> Self {
        Self {
            measure: MeasureKind::WhiteNoise,
            family: FamilyArg::Hol,
            n: 16,
            beta: None,
            seed: 0,
            metropolis_steps: None,
            experimental: false,
            functional: FunctionalArg::SpacetimeL4,
            projector: ProjectorKind::Sharp,
            grid_points: 201,
            lambda_points: 12,
            lambdas: None,
            samples: 10_000,
            report: None,
        }
    }
}

pub fn run_tails(args: &TailsArgs, config: Option<&Path>) -> CliResult<Outcome> {
    let prov = Provenance::start();
    let mut c: TailsConfig = resolve("tails", config, args)?;
    let spec = measure_spec(c.measure, c.family, c.n, c.beta, c.seed, c.projector, c.metropolis_steps, c.experimental)?;
    if spec.kind == MeasureKind::Gibbs {
        c.beta = Some(spec.beta);
    }
    let functional = match c.functional {
        FunctionalArg::L2 => Functional::L2,
        FunctionalArg::SpacetimeL4 => Functional::SpacetimeL4 { projector: c.projector },
        FunctionalArg::Sup => {
            let lambda_max = (0..spec.dim()).map(|k| spec.family.eigenvalue(k)).fold(0.0, f64::max);
            Functional::SupOverGrid { grid: Grid2D::new(Grid2D::half_width_for(lambda_max), c.grid_points) }
        }
    };
    let grid = match &c.lambdas {
        Some(l) => LambdaGrid::Explicit(l.clone()),
        None => LambdaGrid::Auto { points: c.lambda_points },
    };
    let curve = tail_study(&spec, functional, &grid, c.samples)?;
    if let Some(p) = &c.report {
        write_json(p, &curve)?;
        prov.write(p, "tails", &c)?;
    }
    Ok(Outcome::done(format!(
        "{} samples, {} levels: log P(>λ) ≈ {:.4} λ² + {:.4} (R² {:.4})",
        c.samples,
        curve.points.len(),
        curve.fit.slope,
        curve.fit.intercept,
        curve.fit.r_squared
    )))
}

#[derive(Debug, Args, Serialize)]
pub struct OracleCheckArgs {
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    family: Option<FamilyArg>,
    /// Largest mode index swept (the level, for an eigenspace).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    max_index: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleCheckConfig {
    family: FamilyArg,
    max_index: usize,
    report: Option<PathBuf>,
}

impl Default for OracleCheckConfig {
    fn default() -> Self {
        Self { family: FamilyArg::Hol, max_index: 10, report: None }
    }
}

/// Largest spread of oracle/stored ratios still counted as proportional.
const SPREAD_TOL: f64 = 1e-6;

pub fn run_oracle_check(args: &OracleCheckArgs, config: Option<&Path>) -> CliResult<Outcome> {
    let prov = Provenance::start();
    let c: OracleCheckConfig = resolve("oracle-check", config, args)?;
    let family = c.family.family(c.max_index);
    let p = proportionality_sweep(family, c.max_index)?;
    if let Some(path) = &c.report {
        write_json(path, &p)?;
        prov.write(path, "oracle-check", &c)?;
    }
    let pass = p.spread < SPREAD_TOL;
    Ok(Outcome {
        pass,
        summary: format!(
            "{}: {family}, {} quadruples, constant {:.12}, spread {:.3e}",
            if pass { "PASS" } else { "FAIL" },
            p.count,
            p.constant,
            p.spread
        ),
    })
}
