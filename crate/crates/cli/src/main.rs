//! `datavalue`: reproducible training-data valuation runs from a JSON config.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime failure.

mod commands;
mod config;
mod run;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

#[derive(Parser)]
#[command(name = "datavalue", version, about = "Equitable valuation of training data")]
struct Cli {
    /// Run configuration file (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for the valuation engines (overrides the config).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Master seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute per-source values; writes values.json, history.csv, manifest.json.
    Value,
    /// Run an experiment driver; writes curve CSVs, summary.json, manifest.json.
    Experiment {
        #[arg(value_enum)]
        which: Which,
    },
    /// Score the one-pass learning-rate grid for the gradient estimator.
    GridSearch,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Which {
    Flip,
    Noise,
    Removal,
    Addition,
    Adapt,
    Compare,
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let mut config = RunConfig::load(path)?;
    if let Some(workers) = cli.workers {
        if workers == 0 {
            return Err(CliError::Config("--workers must be >= 1".into()));
        }
        config.valuation.workers = workers;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output_dir = out.clone();
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = load_config(&cli)?;
    match cli.command {
        Command::Value => commands::cmd_value(config),
        Command::Experiment { which } => commands::cmd_experiment(config, which),
        Command::GridSearch => commands::cmd_grid_search(config),
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            std::process::exit(2);
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(3);
        }
    }
}
