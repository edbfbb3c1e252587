//! `fptlab` — first-passage-time laboratory for Brownian motion against
//! convex moving boundaries. Subcommands compute the closed-form hitting
//! density and CDF, the conditioned-bridge expectation, PDE residual
//! reports, and the three-route cross-validation table.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{CmdError, CmdOutcome};
use config::{FileConfig, FlagOverrides};

#[derive(Parser)]
#[command(
    name = "fptlab",
    version,
    about = "First-passage-time laboratory: hitting densities of Brownian motion \
             against convex moving boundaries"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// Boundary expression, e.g. "1 + 0.5*t^2"
    #[arg(long)]
    boundary: Option<String>,
    /// JSON config file; flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
    /// First horizon grid point
    #[arg(long)]
    s_start: Option<f64>,
    /// Last horizon grid point
    #[arg(long)]
    s_stop: Option<f64>,
    /// Number of horizon grid points
    #[arg(long)]
    s_count: Option<usize>,
    /// Monte Carlo path count
    #[arg(long)]
    n_paths: Option<usize>,
    /// Monte Carlo steps per path
    #[arg(long)]
    steps: Option<usize>,
    /// RNG seed (required for sampling commands; no entropy default)
    #[arg(long)]
    seed: Option<u64>,
    /// First term of the horizon-limit eps schedule
    #[arg(long)]
    eps0: Option<f64>,
    /// Number of eps schedule terms
    #[arg(long)]
    eps_terms: Option<usize>,
    /// Output file path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: csv or json
    #[arg(long)]
    format: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form density with both Monte Carlo routes on a horizon grid
    Density(CommonArgs),
    /// Closed-form hitting CDF at each grid horizon
    Cdf(CommonArgs),
    /// Expectation of the conditioned-bridge exponential functional
    BridgeExpectation(CommonArgs),
    /// Finite-difference residual report for the analytic kernels
    ResidualReport(CommonArgs),
    /// Three-route comparison with pairwise z-scores
    CrossValidate(CommonArgs),
}

fn flags_of(args: &CommonArgs) -> FlagOverrides {
    FlagOverrides {
        boundary: args.boundary.clone(),
        s_start: args.s_start,
        s_stop: args.s_stop,
        s_count: args.s_count,
        n_paths: args.n_paths,
        steps: args.steps,
        seed: args.seed,
        eps0: args.eps0,
        eps_terms: args.eps_terms,
        out: args.out.clone(),
        format: args.format.clone(),
    }
}

fn run(args: &CommonArgs, go: fn(&config::RunConfig) -> Result<CmdOutcome, CmdError>) -> ExitCode {
    let file = match &args.config {
        Some(path) => match config::load_file(path) {
            Ok(f) => f,
            Err(e) => {
                eprintln!("fptlab: {e}");
                return ExitCode::from(2);
            }
        },
        None => FileConfig::default(),
    };
    let resolved = match config::resolve(file, flags_of(args)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("fptlab: {e}");
            return ExitCode::from(2);
        }
    };
    match go(&resolved) {
        Ok(outcome) if outcome.nonconvergent => ExitCode::from(4),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fptlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn init_worker_cap() {
    if let Ok(raw) = std::env::var("FPT_THREADS") {
        if let Ok(n) = raw.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn main() -> ExitCode {
    init_worker_cap();
    let cli = Cli::parse();
    match &cli.command {
        Command::Density(args) => run(args, commands::cmd_density),
        Command::Cdf(args) => run(args, commands::cmd_cdf),
        Command::BridgeExpectation(args) => run(args, commands::cmd_bridge_expectation),
        Command::ResidualReport(args) => run(args, commands::cmd_residual_report),
        Command::CrossValidate(args) => run(args, commands::cmd_cross_validate),
    }
}
