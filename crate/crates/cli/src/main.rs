//! `gsq`: simulate, analyze, sweep and self-check group-server queues.

mod analyze;
mod input;
mod simulate;
mod svg;
mod sweep;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::input::Failure;

#[derive(Parser)]
#[command(name = "gsq", version, about = "Group-server queues with sleep/work-on threshold control")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
pub struct RunArgs {
    /// Simulated time per replication.
    #[arg(long, default_value_t = 1e4)]
    pub horizon: f64,
    /// Initial stretch excluded from the statistics.
    #[arg(long, default_value_t = 1e3)]
    pub warmup: f64,
    #[arg(long, default_value_t = 20)]
    pub replications: usize,
    /// Replication r uses seed + r.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Replicated simulation of one configuration.
    Simulate {
        config: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Report CSV; printed to stdout when absent.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Event trace CSV of the first replication.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Stationary distribution, power rate and first-passage moments of a
    /// two-group loss configuration.
    Analyze {
        config: PathBuf,
        /// Power levels at which to evaluate E[Gamma(x)^r]; comma separated.
        #[arg(long = "x", value_delimiter = ',')]
        x: Vec<f64>,
        /// Highest moment order r.
        #[arg(long, default_value_t = 1)]
        moments: u32,
        /// Initial distribution for the moments.
        #[arg(long, value_enum, default_value_t = Initial::Stationary)]
        initial: Initial,
        /// State table CSV; the summary goes next to it with a `.summary.csv`
        /// suffix. Both are printed to stdout when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Replicated simulations over a grid of arrival rates.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        lambda_low: f64,
        #[arg(long)]
        lambda_high: f64,
        #[arg(long)]
        lambda_step: f64,
        /// Metrics to keep; all when empty.
        #[arg(long, value_delimiter = ',')]
        metrics: Vec<String>,
        #[command(flatten)]
        run: RunArgs,
        /// Long-format CSV (lambda, metric, mean, ci_low, ci_high).
        #[arg(long)]
        output: PathBuf,
        /// Directory for one SVG chart per metric; defaults to the CSV's directory.
        #[arg(long)]
        svg_dir: Option<PathBuf>,
    },
    /// Built-in consistency checks.
    Validate {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Initial {
    /// The stationary distribution.
    Stationary,
    /// The empty state.
    Empty,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Generator,
    Oracle,
    Crosscheck,
    All,
}

fn configure_threads() {
    if let Some(n) = std::env::var("GSQ_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate {
            config,
            run,
            output,
            trace,
        } => simulate::run(&config, &run, output.as_deref(), trace.as_deref()),
        Command::Analyze {
            config,
            x,
            moments,
            initial,
            output,
        } => analyze::run(&config, &x, moments, initial, output.as_deref()),
        Command::Sweep {
            config,
            lambda_low,
            lambda_high,
            lambda_step,
            metrics,
            run,
            output,
            svg_dir,
        } => {
            let grid = sweep::Grid::new(lambda_low, lambda_high, lambda_step)?;
            sweep::run(&config, &grid, &metrics, &run, &output, svg_dir.as_deref())
        }
        Command::Validate { suite } => validate::run(suite),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
