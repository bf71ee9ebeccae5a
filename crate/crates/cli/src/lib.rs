//! Command-line front end: snapshot files, run configuration and the
//! subcommands that tie generation, simulation and analysis together.

// `!(x > 0.0)` style checks are meant to reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod snapshot;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use error::{CliError, CliResult};

/// Environment variable holding the worker-thread count.
pub const WORKERS_ENV: &str = "DDFLUX_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "ddflux", version, about = "Scale-by-scale energy budgets of variable-density flow")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file (or directory for `simulate`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Config overrides as `--section.key value`.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, num_args = 0..)]
    pub overrides: Vec<String>,
}

#[derive(Debug, Args)]
pub struct Analysis {
    /// Snapshot file or series directory.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an initial state and write it as a snapshot.
    Synth(Common),
    /// Run the solver and write a snapshot series.
    Simulate(Common),
    /// Shell norms and energies of one field.
    Project(Analysis),
    /// Besov shell coefficients, localized sums and norms.
    Besov(Analysis),
    /// Flux spectrum.
    Flux(Analysis),
    /// Budget residual against Q at the last snapshot.
    Budget(Analysis),
    /// Structure-function flux over lags.
    Khm(Analysis),
    /// Measured constants of the kernel estimates.
    VerifyEstimates(Analysis),
}

fn load(common: &Common) -> CliResult<RunConfig> {
    RunConfig::load(common.config.as_deref(), &common.overrides)
}

/// Sizes the global thread pool from `DDFLUX_WORKERS` when set.
pub fn init_workers() -> CliResult<()> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Validation(format!("{WORKERS_ENV} = `{raw}` is not a positive integer")))?;
    // a pool that is already built keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs one parsed command and returns the path it wrote.
pub fn execute(cli: Cli) -> CliResult<PathBuf> {
    type Analyse = fn(&RunConfig, &Path, Option<&Path>) -> CliResult<PathBuf>;
    let (a, f): (&Analysis, Analyse) = match &cli.command {
        Command::Synth(c) => return commands::synth(&load(c)?, c.out.as_deref()),
        Command::Simulate(c) => return commands::simulate(&load(c)?, c.out.as_deref()),
        Command::Project(a) => (a, commands::project),
        Command::Besov(a) => (a, commands::besov),
        Command::Flux(a) => (a, commands::flux),
        Command::Budget(a) => (a, commands::budget),
        Command::Khm(a) => (a, commands::khm),
        Command::VerifyEstimates(a) => (a, commands::verify_estimates),
    };
    f(&load(&a.common)?, &a.input, a.common.out.as_deref())
}
