//! `orbitgeo`: sample Sasaki geodesic families, export the `n = 2`
//! hyperboloid model, report curvature and run randomized audits.
//!
//! Exit status: 0 success, 1 a residual exceeded the tolerance, 2 bad input
//! or I/O failure.

mod check;
mod config;
mod curvature;
mod error;
mod family;
mod hyperboloid;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "orbitgeo",
    version,
    about = "Sasaki geodesics on tangent bundles of real flag manifolds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    common: Common,
}

/// Flags shared by every subcommand.
#[derive(Debug, Args)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Residual tolerance; overrides the config value.
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Seed for randomized audits.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a geodesic family and audit its residuals.
    Family,
    /// Export a geodesic of the n = 2 hyperboloid model (and optionally its mesh).
    Hyperboloid,
    /// Report sectional curvatures of the coordinate planes.
    Curvature,
    /// Run the seeded randomized audit of the core identities.
    Check,
}

/// Result of a command that ran to completion.
pub struct Outcome {
    pub passed: bool,
    pub summary: String,
}

const THREADS_VAR: &str = "ORBITGEO_THREADS";

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        CliError::input(format!(
            "{THREADS_VAR} must be a positive integer, got \"{raw}\""
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::input(format!("cannot size the thread pool: {e}")))
}

fn dispatch(cli: &Cli) -> CliResult<Outcome> {
    configure_threads()?;
    match cli.command {
        Command::Family => family::run(&cli.common),
        Command::Hyperboloid => hyperboloid::run(&cli.common),
        Command::Curvature => curvature::run(&cli.common),
        Command::Check => check::run(&cli.common),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(outcome) if outcome.passed => {
            eprintln!("{}", outcome.summary);
            ExitCode::SUCCESS
        }
        Ok(outcome) => {
            eprintln!("tolerance exceeded: {}", outcome.summary);
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
