//! `crlab`: command-line front end for the resonant-system laboratory.
//!
//! Exit status: 0 on success or PASS, 2 on FAIL, 3 on a configuration
//! error, 1 on any other failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};

use commands::{evolve, lab, norms, sample, tensor, Outcome};
use config::CliError;

#[derive(Debug, Parser)]
#[command(name = "crlab", about = "Spectral simulator and Monte Carlo laboratory for the continuous resonant system")]
struct Cli {
    /// JSON run configuration; flags given on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: available parallelism). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Coupling tensor cache files.
    #[command(subcommand)]
    Tensor(tensor::TensorCommand),
    /// Integrate the truncated flow from a state file.
    Evolve(evolve::EvolveArgs),
    /// Draw samples from a measure.
    Sample(sample::SampleArgs),
    /// Test invariance of a measure under the truncated flow.
    Invariance(lab::InvarianceArgs),
    /// Recurrence of orbits on an eigenspace.
    Recurrence(lab::RecurrenceArgs),
    /// Decay of ‖T_N(u) − T_M(u)‖ in M under white noise.
    Cauchy(lab::CauchyArgs),
    /// Sup-norm concentration of random eigenspace functions.
    Concentration(lab::ConcentrationArgs),
    /// L^p norms of basis functions.
    Norms(norms::NormsArgs),
    /// Tail probabilities of a norm functional.
    Tails(norms::TailsArgs),
    /// Compare stored couplings against direct quadrature.
    OracleCheck(norms::OracleCheckArgs),
}

const EXIT_FAIL: u8 = 2;
const EXIT_CONFIG: u8 = 3;

fn version() -> String {
    format!("{} (tensor cache format {})", env!("CARGO_PKG_VERSION"), crlab::coupling::CACHE_FORMAT_VERSION)
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("threads: must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    let cfg = cli.config.as_deref();
    match &cli.command {
        Command::Tensor(c) => tensor::run(c, cfg),
        Command::Evolve(a) => evolve::run(a, cfg),
        Command::Sample(a) => sample::run(a, cfg),
        Command::Invariance(a) => lab::run_invariance(a, cfg),
        Command::Recurrence(a) => lab::run_recurrence(a, cfg),
        Command::Cauchy(a) => lab::run_cauchy(a, cfg),
        Command::Concentration(a) => lab::run_concentration(a, cfg),
        Command::Norms(a) => norms::run_norms(a, cfg),
        Command::Tails(a) => norms::run_tails(a, cfg),
        Command::OracleCheck(a) => norms::run_oracle_check(a, cfg),
    }
}

fn main() -> ExitCode {
    let matches = match Cli::command().version(version()).try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            // a missing subcommand also prints help, but is a usage error
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_CONFIG),
            };
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match run(cli) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            if outcome.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAIL)
            }
        }
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
