//! `fwf`: generate signals, fit and apply filters, run benchmark sweeps.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Failure;

#[derive(Parser)]
#[command(name = "fwf", version, about = "Functional Wiener filtering toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a signal and write it as CSV
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// overrides the seed in the config
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit a filter to a series and save the model
    Fit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        series: PathBuf,
        /// desired signal; defaults to the series itself
        #[arg(long)]
        desired: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply a saved model to a series
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        series: PathBuf,
        #[arg(long)]
        desired: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// expected filter order; must match the model
        #[arg(long)]
        order: Option<usize>,
        /// first embedded row to predict
        #[arg(long)]
        start: Option<usize>,
        /// one past the last embedded row to predict
        #[arg(long)]
        end: Option<usize>,
    },
    /// Cross-validated MSE sweep plus optional timing scan
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// output directory
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Search kernel width and alpha by training MSE
    Tune {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        series: PathBuf,
        #[arg(long)]
        desired: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn init_threads() -> Result<(), Failure> {
    let n = match std::env::var("FWF_THREADS") {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| {
            Failure::config(format!(
                "FWF_THREADS must be a non-negative integer, got `{v}`"
            ))
        })?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::runtime(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    init_threads()?;
    match cli.command {
        Command::Generate { config, out, seed } => commands::generate(&config, &out, seed),
        Command::Fit {
            config,
            series,
            desired,
            out,
        } => commands::fit(&config, &series, desired.as_deref(), &out),
        Command::Predict {
            model,
            series,
            desired,
            out,
            order,
            start,
            end,
        } => commands::predict(&model, &series, desired.as_deref(), &out, order, start, end),
        Command::Bench { config, out, seed } => commands::bench(&config, &out, seed),
        Command::Tune {
            config,
            series,
            desired,
            out,
        } => commands::tune(&config, &series, desired.as_deref(), &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}
