//! Experiment driver.
//!
//! Every command reads a flat `key = value` config (`--config`), with
//! `SEST_*` environment variables and `--set key=value` overrides on top, and
//! writes `<out>/reports/<name>.{txt,tsv}`.
//!
//! ```text
//! sest gen-data --config configs/hex5.conf
//! sest train    --config configs/hex5.conf --set train.steps=5000
//! sest profile  --config configs/hex5.conf
//! sest accuracy-curve --config configs/hex5.conf --set curve.tolerance=1
//! ```

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use strength_core::config::Config;

mod commands;

#[derive(Parser)]
#[command(name = "sest", about = "Strength estimation and strength-adjusted search experiments")]
struct Cli {
    /// Config file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    sets: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Train the teacher policy and generate tiered train/candidate/query games
    GenData,
    /// Train the strength estimator on the train split
    Train,
    /// Build the per-rank strength profile from the candidate split
    Profile,
    /// Predict the rank of the games in `predict.input`
    Predict,
    /// Rank-prediction accuracy against the number of query games
    AccuracyCurve,
    /// Head-to-head match between `play.a` and `play.b`
    Play,
    /// SE search at every target rank against a fixed-rank SE baseline
    Sweep,
    /// Round-robin tournament over `rr.agents`; writes a win table
    RoundRobin,
    /// Fit Elo ratings to a win table
    Elo,
    /// Move-prediction accuracy of SE search and strength-matched SA search
    MoveAcc,
    /// Train on a subset of ranks and evaluate on all of them
    LimitedRank,
    /// Print the resolved config
    ShowConfig,
}

fn load_config(cli: &Cli) -> anyhow::Result<Config> {
    let mut config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    }
    .with_env();
    for pair in &cli.sets {
        config.set_pair(pair)?;
    }
    Ok(config)
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let config = load_config(cli)?;
    let report = match cli.command {
        Command::GenData => commands::gen_data(&config)?,
        Command::Train => commands::train(&config)?,
        Command::Profile => commands::profile(&config)?,
        Command::Predict => commands::predict(&config)?,
        Command::AccuracyCurve => commands::accuracy_curve(&config)?,
        Command::Play => commands::play(&config)?,
        Command::Sweep => commands::sweep(&config)?,
        Command::RoundRobin => commands::round_robin(&config)?,
        Command::Elo => commands::elo(&config)?,
        Command::MoveAcc => commands::move_acc(&config)?,
        Command::LimitedRank => commands::limited_rank(&config)?,
        Command::ShowConfig => {
            print!("{}", config.snapshot());
            return Ok(());
        }
    };
    let dir = commands::Paths::new(&config)?.reports;
    let written = report.write(&dir)?;
    print!("{}", report.to_text());
    eprintln!("wrote {}", written[0].display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
