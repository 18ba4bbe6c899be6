mod commands;
mod config;
mod grid;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use config::{Overrides, RunConfig};

/// Kinetic Monte-Carlo simulation of a single quantum dot.
#[derive(Parser)]
#[command(name = "qdsim", version)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps and validation.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Pulse cycles per run or per grid point.
    #[arg(long, global = true)]
    cycles: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// X-photon arrival histogram with a double-exponential fit.
    Decay,
    /// Two-detector coincidence histogram.
    G2,
    /// Dark-run histogram with single and double exponential fits.
    Blink,
    /// Parameter grid written to a resumable CSV log.
    Sweep {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        resume: bool,
    },
    /// X and XX output against above-band pump power.
    Saturation {
        #[arg(long, default_value_t = 0.01)]
        from: f64,
        #[arg(long, default_value_t = 10.0)]
        to: f64,
        #[arg(long, default_value_t = 13)]
        points: usize,
    },
    /// Monte-Carlo against the exact chain and the closed-form decay.
    Validate,
}

fn run(cli: Cli) -> Result<()> {
    let overrides = Overrides {
        seed: cli.seed,
        out: cli.out,
        workers: cli.workers,
        cycles: cli.cycles,
    };
    let mut config = RunConfig::load(cli.config.as_deref(), std::env::vars())?;
    config.apply(&overrides)?;
    match cli.command {
        Command::Decay => commands::decay(&config),
        Command::G2 => commands::g2(&config),
        Command::Blink => commands::blink(&config),
        Command::Sweep { grid, resume } => commands::sweep(&config, &grid, resume),
        Command::Saturation { from, to, points } => commands::saturation(&config, from, to, points),
        Command::Validate => commands::validate(&config, &overrides),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
