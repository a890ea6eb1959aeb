//! `fdf`: displacement-flow forecasting from the command line.
//!
//! Subcommands: `synth` generates a synthetic dataset with a runnable
//! config; `ingest` validates inputs and writes the engineered panel;
//! `evaluate` (alias `train`) selects hyperparameters by rolling-origin
//! cross-validation and scores the model zoo on the holdout split;
//! `report` re-renders a persisted report as a text table or SVG charts.
//!
//! Exit codes: 0 success, 2 input error, 3 evaluation error, 4 report
//! error. `FDF_THREADS` caps internal parallelism (0 or unset = automatic).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fdf_cli::commands::{cmd_evaluate, cmd_ingest, cmd_report, cmd_synth, ReportFormat};
use fdf_cli::synth::Scenario;
use fdf_cli::CliError;

#[derive(Parser)]
#[command(name = "fdf", version, about = "Displacement-flow forecasting toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate inputs and write the engineered panel per horizon.
    Ingest {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Select hyperparameters and evaluate the zoo (alias of evaluate).
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Select hyperparameters and evaluate the zoo on the holdout split.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Render a persisted report as a table or SVG artifacts.
    Report {
        #[arg(long)]
        report: PathBuf,
        #[arg(long, default_value = "table")]
        format: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Generate a synthetic dataset plus a runnable config.
    Synth {
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        regions: usize,
        #[arg(long, default_value_t = 48)]
        periods: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn configure_threads() {
    let threads = std::env::var("FDF_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(0);
    if threads > 0 {
        // Ignore failure: the pool can only be built once per process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest { config, out } => cmd_ingest(&config, &out),
        Command::Train { config, out, seed } => cmd_evaluate(&config, &out, seed, "train"),
        Command::Evaluate { config, out, seed } => cmd_evaluate(&config, &out, seed, "evaluate"),
        Command::Report {
            report,
            format,
            out,
        } => {
            let format: ReportFormat = format.parse().map_err(CliError::Report)?;
            let rendered = cmd_report(&report, &format, &out)?;
            println!("{rendered}");
            Ok(())
        }
        Command::Synth {
            scenario,
            seed,
            regions,
            periods,
            out,
        } => {
            let scenario: Scenario = scenario.parse().map_err(CliError::Input)?;
            cmd_synth(scenario, seed, regions, periods, &out)
        }
    }
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("{error}");
            if matches!(error, CliError::Evaluation(_)) {
                eprintln!("{}", error.to_json());
            }
            ExitCode::from(error.exit_code() as u8)
        }
    }
}
