use std::path::PathBuf;

use clap::{Args, Subcommand};
use serde::{Deserialize, Serialize};

use crlab::coupling::{build_tensor, write_tensor};

use super::{required, Outcome};
use crate::config::{resolve, CliError, CliResult, FamilyArg, Provenance};

#[derive(Debug, Subcommand)]
pub enum TensorCommand {
    /// Build the coupling tensor and write the binary cache file.
    Build(BuildArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct BuildArgs {
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    family: Option<FamilyArg>,
    /// Cutoff N (the level, for an eigenspace).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuildConfig {
    family: FamilyArg,
    n: usize,
    out: Option<PathBuf>,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self { family: FamilyArg::Hol, n: 16, out: None }
    }
}

pub fn run(cmd: &TensorCommand, config: Option<&std::path::Path>) -> CliResult<Outcome> {
    let TensorCommand::Build(args) = cmd;
    let prov = Provenance::start();
    let c: BuildConfig = resolve("tensor", config, args)?;
    let out = required(&c.out, "out")?;
    let tensor = build_tensor(c.family.family(c.n), c.n)?;
    write_tensor(&tensor, out).map_err(|e| CliError::Runtime(format!("{}: {e}", out.display())))?;
    prov.write(out, "tensor", &c)?;
    Ok(Outcome::done(format!(
        "tensor {} N={}: {} entries, constant {} -> {}",
        tensor.family(),
        tensor.cutoff(),
        tensor.entries().len(),
        tensor.constant(),
        out.display()
    )))
}
