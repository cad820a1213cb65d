use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;

/// Domain errors (bad inputs, failed runs) exit with 1, configuration
/// errors with 2; clap keeps its own code 2 for usage errors.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Domain(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Domain(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config: {msg}"),
            CliError::Domain(msg) => write!(f, "{msg}"),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "derate",
    version,
    about = "Fault-injection de-rating measurement and prediction"
)]
struct Cli {
    /// Run configuration file
    #[arg(long, global = true, default_value = "run.toml")]
    config: PathBuf,
    /// Write outputs here instead of the configured directory
    #[arg(long, global = true)]
    out: Option<String>,
    /// Override the config's global seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the fault-free design; writes golden.csv and activity.csv
    Golden,
    /// Run the fault-injection campaign; writes fdr.csv
    Campaign,
    /// Export the per-flip-flop feature table; writes features.csv
    Features,
    /// Tune, train and score every configured model on held-out flip-flops
    TrainPredict,
    /// Sweep training-set sizes for every configured model
    LearningCurve,
    /// Generate the demo design, a stimulus and a ready-to-run run.toml
    GenDemo {
        /// Stimulus length in cycles
        #[arg(long, default_value_t = 256)]
        cycles: u32,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Command::GenDemo { cycles } = cli.command {
        let dir = PathBuf::from(cli.out.as_deref().unwrap_or("demo"));
        return commands::gen_demo(&dir, cli.seed.unwrap_or(0), cycles);
    }
    let resolved = config::load(&cli.config, cli.out.as_deref(), cli.seed)?;
    match cli.command {
        Command::Golden => commands::golden(&resolved),
        Command::Campaign => commands::campaign(&resolved),
        Command::Features => commands::features(&resolved),
        Command::TrainPredict => commands::train_predict(&resolved),
        Command::LearningCurve => commands::learning_curve_cmd(&resolved),
        Command::GenDemo { .. } => unreachable!(),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
