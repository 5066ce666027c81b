//! `notimind`: notification-log analytics pipeline.
//!
//! Exit codes: 0 success, 1 validation or domain error, 2 usage error.

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use notimind_cli::{
    run_correlate, run_features, run_ingest, run_synth, run_train, CorrelateArgs, FeaturesArgs,
    IngestArgs, SynthArgs, TrainArgs,
};

#[derive(Parser)]
#[command(
    name = "notimind",
    version,
    about = "Offline pipeline from notification logs and PANAS self-reports to affect classifiers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate both logs and write normalized records plus an error report.
    Ingest(IngestArgs),
    /// Extract the per-segment rate feature matrix and score summary.
    Features(FeaturesArgs),
    /// Correlate every rate feature with the affect score.
    Correlate(CorrelateArgs),
    /// Cross-validate the classifiers and write reports and model files.
    Train(TrainArgs),
    /// Generate a synthetic cohort (and optionally verify it end to end).
    Synth(SynthArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Ingest(args) => run_ingest(args),
        Command::Features(args) => run_features(args),
        Command::Correlate(args) => run_correlate(args),
        Command::Train(args) => run_train(args),
        Command::Synth(args) => run_synth(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
