//! Experiment runner for the latflow toolkit: every library operation is a
//! subcommand with a reproducible flat config, seeded randomness, and
//! machine-readable CSV/JSON artifacts.
//!
//! Exit codes: 0 success, 1 runtime error, 2 config error, 3 budget
//! exceeded, 4 precision fault.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Ctx, PrecisionError};
use config::{Config, ConfigError};
use latflow::Budget;

const ENV_PREFIX: &str = "LATFLOW_";

#[derive(Parser)]
#[command(
    name = "latflow",
    about = "Diagonal flows on lattices, height functions, and Diophantine exponents",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Flat key=value experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// RNG seed; all randomness in a run flows from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for CSV series and the JSON summary.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Per-operation enumeration budget in charged nodes.
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Working precision in bits (informational: exact paths use rationals).
    #[arg(long, global = true)]
    precision: Option<u32>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classical and geometric Diophantine exponents of an affine parameter.
    Omega,
    /// Dimension and dynamical-exponent bound curves over an omega grid.
    Bound,
    /// Finite-horizon growth exponent of the lattice height along the flow.
    Rho,
    /// Systole and Dirichlet-minima profiles of a single point.
    Systole,
    /// Divergence classification over the parameter cube with box counts.
    Classify,
    /// Excursion statistics of the smoothed height along the flow.
    Excursions,
    /// Monte Carlo inequality checks: contraction rates, sublevel scaling,
    /// ranks, Plucker relations, shortest-vector certificates.
    Verify,
    /// Fast deterministic check table across all modules.
    Selftest,
}

/// Flag value, else LATFLOW_<NAME> environment variable, else default.
fn flag_or_env<T: std::str::FromStr>(
    flag: Option<T>,
    name: &str,
    default: T,
) -> Result<T, ConfigError> {
    if let Some(v) = flag {
        return Ok(v);
    }
    match std::env::var(format!("{ENV_PREFIX}{name}")) {
        Ok(raw) => raw
            .parse()
            .map_err(|_| ConfigError(format!("bad {ENV_PREFIX}{name} value {raw:?}"))),
        Err(_) => Ok(default),
    }
}

fn build_ctx(cli: &Cli) -> Result<Ctx, ConfigError> {
    let config_path = match &cli.config {
        Some(p) => Some(p.clone()),
        None => std::env::var(format!("{ENV_PREFIX}CONFIG")).ok().map(PathBuf::from),
    };
    let cfg = match &config_path {
        Some(p) => Config::from_file(p)?,
        None => Config::default(),
    };
    let seed = flag_or_env(cli.seed, "SEED", 0)?;
    let out = flag_or_env(cli.out.clone(), "OUT", PathBuf::from("out"))?;
    let budget = flag_or_env(cli.budget, "BUDGET", Budget::DEFAULT_LIMIT)?;
    let precision = flag_or_env(cli.precision, "PRECISION", 64)?;
    Ok(Ctx {
        cfg,
        seed,
        out,
        budget,
        precision,
    })
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    if let Some(e) = err.downcast_ref::<latflow::Error>() {
        if matches!(e, latflow::Error::BudgetExceeded { .. }) {
            return 3;
        }
    }
    if err.downcast_ref::<PrecisionError>().is_some() {
        return 4;
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = match build_ctx(&cli) {
        Ok(ctx) => ctx,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    let result = match cli.cmd {
        Cmd::Omega => commands::cmd_omega(&ctx),
        Cmd::Bound => commands::cmd_bound(&ctx),
        Cmd::Rho => commands::cmd_rho(&ctx),
        Cmd::Systole => commands::cmd_systole(&ctx),
        Cmd::Classify => commands::cmd_classify(&ctx),
        Cmd::Excursions => commands::cmd_excursions(&ctx),
        Cmd::Verify => commands::cmd_verify(&ctx),
        Cmd::Selftest => commands::cmd_selftest(&ctx),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
