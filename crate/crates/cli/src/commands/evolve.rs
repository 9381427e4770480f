use std::fs::File;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use crlab::dynamics::{
    energy, mass, projected_hamiltonian, CoefficientState, Integrator, IntegratorConfig, Method, Projector,
    ProjectorKind,
};

use super::{load_tensor, required, serde_value, IntegratorFields, Outcome};
use crate::config::{resolve, sidecar, write_json, CliError, CliResult, Provenance};

#[derive(Debug, Args, Serialize)]
pub struct EvolveArgs {
    /// Tensor cache file; built from the initial state's family if omitted.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    tensor: Option<PathBuf>,
    /// Initial state JSON: {"family": {"kind": ...}, "coeffs": [[re, im], ...]}.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    init: Option<PathBuf>,
    /// Duration of the run (negative runs backward).
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<f64>,
    /// sharp | smooth
    #[arg(long, value_parser = serde_value::<ProjectorKind>)]
    #[serde(skip_serializing_if = "Option::is_none")]
    projector: Option<ProjectorKind>,
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
    /// Output spacing; every accepted step when omitted.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    record_dt: Option<f64>,
    /// Trajectory CSV: t, n, re, im.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
    /// Conservation CSV: t, mass, energy, hamiltonian (default: next to --out).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    conservation: Option<PathBuf>,
    /// Final state, in the same JSON format as --init.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    final_state: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveConfig {
    tensor: Option<PathBuf>,
    init: Option<PathBuf>,
    t: f64,
    projector: ProjectorKind,
    method: Method,
    rel_tol: f64,
    abs_tol: f64,
    max_step: f64,
    record_dt: Option<f64>,
    out: Option<PathBuf>,
    conservation: Option<PathBuf>,
    final_state: Option<PathBuf>,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        let i = IntegratorFields::from(IntegratorConfig::default());
        Self {
            tensor: None,
            init: None,
            t: 1.0,
            projector: ProjectorKind::Sharp,
            method: i.method,
            rel_tol: i.rel_tol,
            abs_tol: i.abs_tol,
            max_step: i.max_step,
            record_dt: None,
            out: None,
            conservation: None,
            final_state: None,
        }
    }
}

#[derive(Serialize)]
struct TrajectoryRow {
    t: f64,
    n: usize,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct ConservationRow {
    t: f64,
    mass: f64,
    energy: f64,
    hamiltonian: f64,
}

pub fn read_state(path: &Path) -> CliResult<CoefficientState> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    let state: CoefficientState =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("init: {}: {e}", path.display())))?;
    state.validate()?;
    Ok(state)
}

pub fn run(args: &EvolveArgs, config: Option<&Path>) -> CliResult<Outcome> {
    let prov = Provenance::start();
    let c: EvolveConfig = resolve("evolve", config, args)?;
    let out = required(&c.out, "out")?;
    if !c.t.is_finite() {
        return Err(CliError::Config(format!("t: must be finite, got {}", c.t)));
    }
    if let Some(dt) = c.record_dt {
        if dt.is_nan() || dt <= 0.0 {
            return Err(CliError::Config(format!("record_dt: must be positive, got {dt}")));
        }
    }
    let integ_cfg = IntegratorConfig::from(IntegratorFields {
        method: c.method,
        rel_tol: c.rel_tol,
        abs_tol: c.abs_tol,
        max_step: c.max_step,
    });
    integ_cfg.validate()?;
    let mut state = read_state(required(&c.init, "init")?)?;
    let cutoff = state.cutoff();
    let tensor = load_tensor(c.tensor.as_deref(), state.family, cutoff)?;
    let proj = Projector { kind: c.projector, cutoff };

    let conservation_path = c.conservation.clone().unwrap_or_else(|| sidecar(out, "conservation.csv"));
    let mut traj = csv::Writer::from_writer(File::create(out)?);
    let mut cons = csv::Writer::from_writer(File::create(&conservation_path)?);
    let mut record = |s: &CoefficientState| -> crlab::Result<()> {
        for (n, z) in s.coeffs.iter().enumerate() {
            traj.serialize(TrajectoryRow { t: s.time, n, re: z.re, im: z.im }).map_err(csv_to_core)?;
        }
        cons.serialize(ConservationRow {
            t: s.time,
            mass: mass(s),
            energy: energy(s),
            hamiltonian: projected_hamiltonian(s, &tensor, &proj)?,
        })
        .map_err(csv_to_core)
    };

    let t0 = state.time;
    let t_end = t0 + c.t;
    record(&state)?;
    let mut integ = Integrator::new(&tensor, &proj, integ_cfg)?;
    match c.record_dt {
        None => integ.advance_to(&mut state, t_end, &mut record)?,
        Some(dt) => {
            let steps = (c.t.abs() / dt).ceil() as usize;
            for k in 1..=steps {
                let target = if k == steps { t_end } else { t0 + c.t.signum() * dt * k as f64 };
                integ.advance_to(&mut state, target, |_| Ok(()))?;
                record(&state)?;
            }
        }
    }
    traj.flush()?;
    cons.flush()?;
    if let Some(p) = &c.final_state {
        write_json(p, &state)?;
    }
    prov.write(out, "evolve", &c)?;
    Ok(Outcome::done(format!(
        "evolved {} N={cutoff} from t={t0} to t={}; mass {:.12e} -> {}",
        state.family,
        state.time,
        mass(&state),
        out.display()
    )))
}

fn csv_to_core(e: csv::Error) -> crlab::Error {
    crlab::Error::Io(std::io::Error::other(e.to_string()))
}
