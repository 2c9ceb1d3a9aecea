use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use cwfcm_cli::commands::{self, BenchArgs, ClusterArgs, NoiseArgs, StatsArgs};

/// Fuzzy c-means with Canberra distance, VMR feature weights and
/// deterministic initialization.
#[derive(Parser)]
#[command(name = "cwfcm", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster one dataset and report validation scores
    Cluster(ClusterArgs),
    /// Run a seeded sweep over datasets, methods, noise levels and trials
    Bench(BenchArgs),
    /// Friedman test and Nemenyi post-hoc over a results CSV
    Stats(StatsArgs),
    /// Write a copy of a dataset with Gaussian attribute noise
    Noise(NoiseArgs),
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Cluster(args) => print!("{}", commands::cluster(&args)?),
        Command::Bench(args) => {
            let rows = commands::bench(&args)?;
            let failed = rows.iter().filter(|r| r.failed).count();
            if failed > 0 {
                eprintln!("error: {failed} of {} runs failed", rows.len());
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Stats(args) => {
            commands::stats(&args)?;
        }
        Command::Noise(args) => commands::noise(&args)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
