//! Command-line front end for the rotor bar diagnosis pipeline.
//!
//! Six subcommands mirror the pipeline stages: `simulate` writes a labelled
//! startup-current corpus, `extract` condenses it into a feature matrix,
//! `train` and `predict` handle a single saved model, `evaluate` runs the
//! cross-validated comparison grid, and `report` re-renders a saved report.
//!
//! Every command that produces files takes an output directory, locks it
//! against concurrent runs, and echoes the effective settings into
//! `run_config.json` there, so any artifact can be traced back to the exact
//! invocation that made it. Stochastic commands require an explicit seed;
//! there is no wall-clock fallback, and rerunning with the same arguments
//! yields byte-identical outputs.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rotorbar_core::Error;

use config::Format;

#[derive(Parser)]
#[command(
    name = "rotorbar",
    version,
    about = "Broken rotor bar diagnosis from startup current transients"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesise a labelled startup-current corpus (one CSV per record plus a manifest)
    Simulate(SimulateArgs),
    /// Compute the feature matrix for a simulated corpus
    Extract(ExtractArgs),
    /// Train a random forest on a feature CSV and save it as JSON
    Train(TrainArgs),
    /// Score a feature CSV with a saved model
    Predict(PredictArgs),
    /// Cross-validate the forest and baselines, writing report files
    Evaluate(EvaluateArgs),
    /// Re-render a saved report without recomputing anything
    Report(ReportArgs),
}

#[derive(clap::Args)]
struct SimulateArgs {
    /// Master seed for the generator (required: no wall-clock default)
    #[arg(long)]
    seed: Option<u64>,
    /// JSON run configuration (generator overrides, trials_per_cell, fallbacks)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for the signal CSVs and manifest
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct ExtractArgs {
    /// Manifest written by `simulate`
    manifest: PathBuf,
    /// Directory for features.csv
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct TrainArgs {
    /// Feature matrix written by `extract`
    features_csv: PathBuf,
    /// Seed for bootstrap resampling and feature subsets (required)
    #[arg(long)]
    seed: Option<u64>,
    /// JSON run configuration (seed and output fallbacks)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for model.json
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of trees (default 100)
    #[arg(long)]
    trees: Option<usize>,
    /// Train on this feature subset instead of every column
    #[arg(long, value_delimiter = ',', value_name = "NAME,...")]
    features: Option<Vec<String>>,
}

#[derive(clap::Args)]
struct PredictArgs {
    /// Saved model (model.json from `train`)
    model: PathBuf,
    /// Feature matrix to score; columns are matched to the model by name
    features_csv: PathBuf,
    /// Directory for verdicts.csv
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct EvaluateArgs {
    /// Feature matrix written by `extract`
    features_csv: PathBuf,
    /// Seed for fold assignment and forest training (required)
    #[arg(long)]
    seed: Option<u64>,
    /// JSON run configuration (folds, tree_counts, fallbacks)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for report.json and the rendered tables
    #[arg(long)]
    out: Option<PathBuf>,
    /// Stdout rendering: table, json, or csv (csv also writes per-cell ROC files)
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Sweep only this ensemble size instead of the default ladder
    #[arg(long)]
    trees: Option<usize>,
    /// Evaluate only this feature subset instead of the default ones
    #[arg(long, value_delimiter = ',', value_name = "NAME,...")]
    features: Option<Vec<String>>,
}

#[derive(clap::Args)]
struct ReportArgs {
    /// report.json written by `evaluate`
    report: PathBuf,
    /// Stdout rendering: table, json, or csv
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Also write the rendered tables into this directory
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failures bucketed by exit code: usage mistakes exit 1, bad inputs and
/// runtime failures exit 2, and solver non-convergence exits 3 so scripted
/// sweeps can tell "data rejected" from "model did not settle".
#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
    Core(Error),
}

type CliResult<T> = Result<T, CliError>;

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Data(msg) => f.write_str(msg),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Core(e) => core_exit_code(e),
        }
    }
}

fn core_exit_code(e: &Error) -> u8 {
    match e {
        Error::Convergence { .. } => 3,
        // per-record wrappers keep the underlying cause
        Error::Record { source, .. } => core_exit_code(source),
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version land on stdout and exit 0; real parse
            // errors land on stderr and exit 1
            let code = u8::from(e.use_stderr());
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate(args) => commands::simulate(args),
        Command::Extract(args) => commands::extract(args),
        Command::Train(args) => commands::train(args),
        Command::Predict(args) => commands::predict(args),
        Command::Evaluate(args) => commands::evaluate(args),
        Command::Report(args) => commands::render_report(args),
    }
}
