//! `vdyn`: generate reference data, train and sweep the learned vehicle
//! models, evaluate them against the white-box benchmark and plot results.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric failure,
//! 4 I/O error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vdyn::error::ErrorClass;
use vdyn::training::ModelKind;

#[derive(Parser, Debug)]
#[command(
    name = "vdyn",
    version,
    about = "Neural and hybrid single-track vehicle models"
)]
struct Cli {
    /// TOML file overriding solver, vehicle, tire, data and training defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a reference sample and write clean and noisy CSVs plus the scaler.
    Generate {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        sample: u8,
    },
    /// Run the linear-tire benchmark on sample three and report its SSE.
    SimulateOde,
    /// Train one network on all three samples.
    Train {
        #[arg(long)]
        model: ModelKind,
        #[arg(long)]
        hidden: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        lr: Option<f64>,
        /// ADAM iterations per sample.
        #[arg(long)]
        iterations: Option<usize>,
    },
    /// Train every hidden size and seed and tabulate training and validation SSE.
    Sweep {
        #[arg(long)]
        model: ModelKind,
        #[arg(long, value_delimiter = ',')]
        hidden: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        iterations: Option<usize>,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Repeat the sweep for each learning rate and summarize.
    SweepLr {
        #[arg(long)]
        model: ModelKind,
        #[arg(long, value_delimiter = ',')]
        rates: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        hidden: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Score a weight file on sample three and write a JSON report.
    Evaluate {
        #[arg(long)]
        weights: PathBuf,
        /// Scaler written by `generate`; refused if it belongs to another config.
        #[arg(long)]
        scaler: Option<PathBuf>,
    },
    /// Render SVG figures from a report and/or sweep tables.
    Plot {
        #[arg(long)]
        report: Option<PathBuf>,
        /// Sweep JSON tables for the validation-error scatter.
        #[arg(long)]
        sweep: Vec<PathBuf>,
    },
}

fn exit_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Config => 2,
        ErrorClass::Numeric => 3,
        ErrorClass::Io => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // messages already carry their causes
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.class()))
        }
    }
}
