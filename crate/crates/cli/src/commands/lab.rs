use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use crlab::dynamics::{IntegratorConfig, Method, Projector, ProjectorKind};
use crlab::lab::{
    cauchy_study, concentration_study, invariance_test, recurrence_experiment, CauchyConfig, ConcentrationConfig,
    ObservableSet, RecurrenceConfig, Verdict,
};
use crlab::measures::MeasureKind;

use super::sample::{measure_spec, MeasureArgs};
use super::{load_tensor, serde_value, IntegratorFields, Outcome};
use crate::config::{resolve, write_json, CliResult, FamilyArg, Provenance};

/// Flat integrator overrides.
#[derive(Debug, Args, Serialize)]
pub struct IntegratorArgs {
    /// adaptive-rk | implicit-midpoint
    #[arg(long, value_parser = serde_value::<Method>)]
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<Method>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    rel_tol: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    abs_tol: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    max_step: Option<f64>,
}

fn write_report<C: Serialize, R: Serialize>(
    prov: &Provenance,
    path: Option<&Path>,
    subcommand: &str,
    config: &C,
    report: &R,
) -> CliResult<()> {
    if let Some(p) = path {
        write_json(p, report)?;
        prov.write(p, subcommand, config)?;
    }
    Ok(())
}

#[derive(Debug, Args, Serialize)]
pub struct InvarianceArgs {
    /// eigenspace | gaussian-free | gibbs | white-noise
    #[arg(long, value_parser = serde_value::<MeasureKind>)]
    #[serde(skip_serializing_if = "Option::is_none")]
    measure: Option<MeasureKind>,
    #[command(flatten)]
    #[serde(flatten)]
    measure_args: MeasureArgs,
    /// Flow cutoff (also the gibbs weight cutoff); defaults to the pairing
    /// the measure requires.
    #[arg(long, value_parser = serde_value::<ProjectorKind>)]
    #[serde(skip_serializing_if = "Option::is_none")]
    projector: Option<ProjectorKind>,
    /// Tensor cache file; built fresh if omitted.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    tensor: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    /// σ values for the H^{−σ} observables.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    negative_sobolev: Option<Vec<f64>>,
    #[command(flatten)]
    #[serde(flatten)]
    integrator: IntegratorArgs,
    /// Report JSON.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InvarianceConfig {
    measure: MeasureKind,
    family: FamilyArg,
    n: usize,
    beta: Option<f64>,
    seed: u64,
    metropolis_steps: Option<u32>,
    experimental: bool,
    projector: Option<ProjectorKind>,
    tensor: Option<PathBuf>,
    t: f64,
    samples: usize,
    negative_sobolev: Vec<f64>,
    method: Method,
    rel_tol: f64,
    abs_tol: f64,
    max_step: f64,
    report: Option<PathBuf>,
}

impl Default for InvarianceConfig {
    fn default() -> Self {
        let i = IntegratorFields::from(IntegratorConfig::default());
        Self {
            measure: MeasureKind::WhiteNoise,
            family: FamilyArg::Hol,
            n: 16,
            beta: None,
            seed: 0,
            metropolis_steps: None,
            experimental: false,
            projector: None,
            tensor: None,
            t: 1.0,
            samples: 2000,
            negative_sobolev: ObservableSet::default().negative_sobolev,
            method: i.method,
            rel_tol: i.rel_tol,
            abs_tol: i.abs_tol,
            max_step: i.max_step,
            report: None,
        }
    }
}

pub fn run_invariance(args: &InvarianceArgs, config: Option<&Path>) -> CliResult<Outcome> {
    let prov = Provenance::start();
    let mut c: InvarianceConfig = resolve("invariance", config, args)?;
    let projector = c.projector.unwrap_or(match c.measure {
        MeasureKind::Eigenspace | MeasureKind::WhiteNoise => ProjectorKind::Sharp,
        MeasureKind::GaussianFree | MeasureKind::Gibbs => ProjectorKind::Smooth,
    });
    let spec = measure_spec(c.measure, c.family, c.n, c.beta, c.seed, projector, c.metropolis_steps, c.experimental)?;
    c.projector = Some(projector);
    if spec.kind == MeasureKind::Gibbs {
        c.beta = Some(spec.beta);
    }
    let integrator = IntegratorConfig::from(IntegratorFields {
        method: c.method,
        rel_tol: c.rel_tol,
        abs_tol: c.abs_tol,
        max_step: c.max_step,
    });
    let tensor = load_tensor(c.tensor.as_deref(), spec.family, spec.cutoff)?;
    let observables = ObservableSet { negative_sobolev: c.negative_sobolev.clone(), ..ObservableSet::default() };
    let proj = Projector { kind: projector, cutoff: spec.cutoff };
    let report = invariance_test(&spec, &tensor, &proj, c.t, c.samples, &observables, &integrator)?;
    write_report(&prov, c.report.as_deref(), "invariance", &c, &report)?;
    if !report.cross_check.pass {
        eprintln!(
            "warning: hamiltonian cross-check failed (tensor consistency {:.3e}, drift {:.3e})",
            report.cross_check.tensor_consistency, report.cross_check.flow_hamiltonian_drift
        );
    }
    let verdict = match report.verdict {
        Verdict::Pass => "PASS",
        Verdict::Fail => "FAIL",
    };
    Ok(Outcome {
        pass: report.verdict == Verdict::Pass,
        summary: format!(
            "{verdict}: {:?} on {} N={}, t={}, {} samples, max |z| {:.3}, min Bonferroni KS p {:.3e}",
            spec.kind, spec.family, spec.cutoff, c.t, c.samples, report.max_abs_z, report.min_p_bonferroni
        ),
    })
}

#[derive(Debug, Args, Serialize)]
pub struct RecurrenceArgs {
    /// Eigenspace level N.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    level: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    t_max: Option<f64>,
    /// Checkpoint spacing.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    dt: Option<f64>,
    /// Window length for the running minimum.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    window: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    /// Threshold as a fraction of the initial norm.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    target_fraction: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    integrator: IntegratorArgs,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecurrenceCliConfig {
    level: usize,
    t_max: f64,
    dt: f64,
    window: f64,
    samples: usize,
    seed: u64,
    theta: f64,
    target_fraction: f64,
    method: Method,
    rel_tol: f64,
    abs_tol: f64,
    max_step: f64,
    report: Option<PathBuf>,
}

impl Default for RecurrenceCliConfig {
    fn default() -> Self {
        let r = RecurrenceConfig::default();
        let i = IntegratorFields::from(r.integrator);
        Self {
            level: r.level,
            t_max: r.t_max,
            dt: r.dt,
            window: r.window,
            samples: r.n_samples,
            seed: r.seed,
            theta: r.theta,
            target_fraction: r.target_fraction,
            method: i.method,
            rel_tol: i.rel_tol,
            abs_tol: i.abs_tol,
            max_step: i.max_step,
            report: None,
        }
    }
}

/// The target fraction is a soft criterion: it is reported, and does not
/// change the exit status.
pub fn run_recurrence(args: &RecurrenceArgs, config: Option<&Path>) -> CliResult<Outcome> {
    let prov = Provenance::start();
    let c: RecurrenceCliConfig = resolve("recurrence", config, args)?;
    let rc = RecurrenceConfig {
        level: c.level,
        t_max: c.t_max,
        dt: c.dt,
        window: c.window,
        n_samples: c.samples,
        seed: c.seed,
        theta: c.theta,
        target_fraction: c.target_fraction,
        integrator: IntegratorFields { method: c.method, rel_tol: c.rel_tol, abs_tol: c.abs_tol, max_step: c.max_step }
            .into(),
    };
    let report = recurrence_experiment(&rc)?;
    write_report(&prov, c.report.as_deref(), "recurrence", &c, &report)?;
    Ok(Outcome::done(format!(
        "E_{}: {:.1}% of {} samples recurred below θ={} by t={} (target {:.0}%: {})",
        c.level,
        100.0 * report.fraction_recurred,
        c.samples,
        c.theta,
        c.t_max,
        100.0 * c.target_fraction,
        if report.meets_target { "met" } else { "not met" }
    )))
}

#[derive(Debug, Args, Serialize)]
pub struct CauchyArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    /// The larger cutoff N.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    /// Smaller cutoffs, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    m_values: Option<Vec<usize>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CauchyCliConfig {
    sigma: f64,
    n: usize,
    m_values: Vec<usize>,
    samples: usize,
    seed: u64,
    report: Option<PathBuf>,
}

impl Default for CauchyCliConfig {
    fn default() -> Self {
        Self { sigma: 1.5, n: 64, m_values: vec![4, 8, 16, 32], samples: 1000, seed: 0, report: None }
    }
}

pub fn run_cauchy(args: &CauchyArgs, config: Option<&Path>) -> CliResult<Outcome> {
    let prov = Provenance::start();
    let c: CauchyCliConfig = resolve("cauchy", config, args)?;
    let cc =
        CauchyConfig { sigma: c.sigma, cutoff: c.n, m_values: c.m_values.clone(), n_samples: c.samples, seed: c.seed };
    let report = cauchy_study(&cc)?;
    write_report(&prov, c.report.as_deref(), "cauchy", &c, &report)?;
    let slope = report.log_log_slope.unwrap_or(f64::NAN);
    let pass = report.monotone && slope < 0.0;
    Ok(Outcome {
        pass,
        summary: format!(
            "{}: N={}, σ={}, monotone decrease {}, log-log slope {slope:.3}",
            if pass { "PASS" } else { "FAIL" },
            c.n,
            c.sigma,
            report.monotone
        ),
    })
}

#[derive(Debug, Args, Serialize)]
pub struct ConcentrationArgs {
    /// Eigenspace levels, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    levels: Option<Vec<usize>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    points_per_wavelength: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    margin: Option<f64>,
    /// Band for the normalized ratio, as lo,hi.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    #[serde(skip_serializing_if = "Option::is_none")]
    band: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConcentrationCliConfig {
    levels: Vec<usize>,
    samples: usize,
    seed: u64,
    points_per_wavelength: f64,
    margin: f64,
    band: [f64; 2],
    report: Option<PathBuf>,
}

impl Default for ConcentrationCliConfig {
    fn default() -> Self {
        let d = ConcentrationConfig::default();
        Self {
            levels: d.levels,
            samples: d.n_samples,
            seed: d.seed,
            points_per_wavelength: d.points_per_wavelength,
            margin: d.margin,
            band: d.band,
            report: None,
        }
    }
}

pub fn run_concentration(args: &ConcentrationArgs, config: Option<&Path>) -> CliResult<Outcome> {
    let prov = Provenance::start();
    let c: ConcentrationCliConfig = resolve("concentration", config, args)?;
    let cc = ConcentrationConfig {
        levels: c.levels.clone(),
        n_samples: c.samples,
        seed: c.seed,
        points_per_wavelength: c.points_per_wavelength,
        margin: c.margin,
        band: c.band,
    };
    let report = concentration_study(&cc)?;
    write_report(&prov, c.report.as_deref(), "concentration", &c, &report)?;
    let medians: Vec<String> = report.rows.iter().map(|r| format!("N={}: {:.3}", r.level, r.median)).collect();
    Ok(Outcome {
        pass: report.band_stable,
        summary: format!(
            "{}: medians {}; spread ×{:.3}",
            if report.band_stable { "PASS" } else { "FAIL" },
            medians.join(", "),
            report.median_spread
        ),
    })
}
