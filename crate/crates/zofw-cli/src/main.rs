//! `zofw`: query-metered benchmark runner for zeroth-order Frank-Wolfe
//! solvers. Exit codes: 0 success, 1 check or run failure, 2 usage or
//! configuration error.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug)]
pub enum AppError {
    /// Bad usage or configuration: exit code 2.
    Config(String),
    /// A check or sub-run failed: exit code 1.
    Failure(String),
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Config(m) => write!(f, "config error: {m}"),
            AppError::Failure(m) => write!(f, "{m}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "zofw", version, about = "Zeroth-order Frank-Wolfe benchmark runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a TOML config and write its CSV trace.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default `out/`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Apply per-feature max-abs scaling to the dataset.
        #[arg(long)]
        scale_features: bool,
    },
    /// Run several solvers over a seed list and merge the traces.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        scale_features: bool,
    },
    /// Run an attack experiment and write the success-rate curve.
    AttackEval {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the statistical self-check suite.
    Verify {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Tamper the contraction bound so the suite must fail.
        #[arg(long)]
        negative_control: bool,
    },
    /// Print dataset statistics for a LIBSVM file.
    Stats {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        declared_d: Option<usize>,
    },
}

fn dispatch(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Run { config, seed, out, scale_features } => {
            commands::cmd_run(&config, seed, &commands::default_out_dir(out), scale_features)
        }
        Command::Compare { config, out, scale_features } => {
            commands::cmd_compare(&config, &commands::default_out_dir(out), scale_features)
        }
        Command::AttackEval { config, seed, out } => {
            commands::cmd_attack_eval(&config, seed, &commands::default_out_dir(out))
        }
        Command::Verify { seed, negative_control } => commands::cmd_verify(seed, negative_control),
        Command::Stats { data, declared_d } => commands::cmd_stats(&data, declared_d),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ AppError::Config(_)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(e @ AppError::Failure(_)) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
    }
}
