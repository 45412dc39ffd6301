//! Batch front end for the `shapeprop` library.
//!
//! Every subcommand reads one TOML [`config::RunConfig`], writes its artifacts
//! plus an `effective_config.toml` echo into the output directory, and maps
//! failures to exit codes: 1 for invalid input, 2 for numerical failure.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{cmd_converge, cmd_optimize, cmd_response, cmd_solve, cmd_unloaded, Outcome};
pub use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<shapeprop::Error> for CliError {
    fn from(e: shapeprop::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// One static solve; writes displacement CSV and VTK.
    Solve,
    /// Max deflection over a sweep of rectangular node arrays.
    Converge,
    /// Oracle bound, then the genetic algorithm (or a thickness study).
    Optimize,
    /// Unloaded-shape iteration trace.
    Unloaded,
    /// Pitch response of an explicit layup over the schedule.
    Response,
}

#[derive(Debug, Parser)]
#[command(
    name = "shapeprop",
    version,
    about = "Shape-adaptive composite propeller blade tools"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides `ga.seed` (0 to 2^63 - 1, the TOML integer range).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(..=i64::MAX as u64))]
    pub seed: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Overrides `output.dir`.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

/// Loads the config named on the command line and applies flag overrides.
pub fn effective_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Validation("--config PATH is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.ga.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    Ok(cfg)
}

pub fn execute(command: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match command {
        Command::Solve => cmd_solve(cfg),
        Command::Converge => cmd_converge(cfg),
        Command::Optimize => cmd_optimize(cfg),
        Command::Unloaded => cmd_unloaded(cfg),
        Command::Response => cmd_response(cfg),
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Validation("--threads must be >= 1".into()));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cfg = effective_config(cli)?;
    execute(cli.command, &cfg)
}
