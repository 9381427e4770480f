//! One module per subcommand. Each has a clap argument struct whose fields
//! are all optional overrides and a serde config struct holding the
//! resolved values.

pub mod evolve;
pub mod lab;
pub mod norms;
pub mod sample;
pub mod tensor;

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crlab::basis::BasisFamily;
use crlab::coupling::{build_tensor, read_tensor, CouplingTensor};
use crlab::dynamics::{IntegratorConfig, Method};

use crate::config::{CliError, CliResult};

/// What a command reports back: pass/fail decides the exit status.
pub struct Outcome {
    pub pass: bool,
    pub summary: String,
}

impl Outcome {
    pub fn done(summary: String) -> Self {
        Self { pass: true, summary }
    }
}

/// Parses a kebab-case enum value through its serde representation, so the
/// core enums can be used on the command line unchanged.
pub fn serde_value<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_owned())).map_err(|e| e.to_string())
}

pub fn required<'a>(path: &'a Option<PathBuf>, key: &str) -> CliResult<&'a Path> {
    path.as_deref().ok_or_else(|| CliError::Config(format!("{key}: required but not given")))
}

/// Integrator settings as they appear flat in every config that evolves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorFields {
    pub method: Method,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
}

impl From<IntegratorConfig> for IntegratorFields {
    fn from(c: IntegratorConfig) -> Self {
        Self { method: c.method, rel_tol: c.rel_tol, abs_tol: c.abs_tol, max_step: c.max_step }
    }
}

impl From<IntegratorFields> for IntegratorConfig {
    fn from(f: IntegratorFields) -> Self {
        Self { method: f.method, rel_tol: f.rel_tol, abs_tol: f.abs_tol, max_step: f.max_step }
    }
}

/// Tensor from a cache file, or built fresh. A file must match the
/// requested family and cutoff.
pub fn load_tensor(path: Option<&Path>, family: BasisFamily, cutoff: usize) -> CliResult<CouplingTensor> {
    match path {
        None => Ok(build_tensor(family, cutoff)?),
        Some(p) => {
            let t = read_tensor(p).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display())))?;
            if t.family() != family || t.cutoff() != cutoff {
                return Err(CliError::Config(format!(
                    "tensor: {} holds ({}, N={}), run needs ({family}, N={cutoff})",
                    p.display(),
                    t.family(),
                    t.cutoff()
                )));
            }
            Ok(t)
        }
    }
}
