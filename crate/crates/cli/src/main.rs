//! `spherecover`: train, evaluate and compare randomised sphere cover
//! classifiers from the command line.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spherecover::data::Family;
use spherecover::filters::FilterMethod;

use crate::config::{DataArgs, FileConfig, ModelArgs};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "spherecover", version, about = "Randomised sphere cover classifiers and ensembles")]
pub struct Cli {
    /// Master seed for every random choice.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one model (selecting parameters when grids are given) and save it.
    Train(TrainArgs),
    /// Classify the rows of a CSV file with a saved model.
    Predict(PredictArgs),
    /// Repeated train/test runs of one or more models.
    Experiment(ExperimentArgs),
    /// Bias/variance decomposition of one or more models.
    Bv(BvArgs),
    /// Friedman test, Nemenyi critical difference and CD diagram.
    Compare(CompareArgs),
    /// Rank attributes and write the reduced dataset.
    Filter(FilterArgs),
    /// Generate a synthetic twonorm or ringnorm dataset.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Folds used for parameter selection.
    #[arg(long)]
    pub cv_folds: Option<usize>,
    /// Model file (default: <out>/model.json).
    #[arg(long)]
    pub model_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Model file written by `train` or `experiment`.
    #[arg(long)]
    pub model_file: PathBuf,
    /// CSV with the model's attribute columns and optionally a class column.
    #[arg(long)]
    pub data: PathBuf,
    /// Predictions CSV (default: standard output).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Number of independent train/test runs.
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub cv_folds: Option<usize>,
    /// Held-out fraction when splitting a data file.
    #[arg(long)]
    pub test_fraction: Option<f64>,
    /// Record wall-clock seconds per run (makes outputs non-reproducible).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct BvArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Number of bootstrap training sets.
    #[arg(long)]
    pub s: Option<usize>,
    /// Size of each bootstrap training set.
    #[arg(long)]
    pub boot_size: Option<usize>,
    #[arg(long)]
    pub test_fraction: Option<f64>,
    /// Folds used when alpha or kappa must be selected.
    #[arg(long)]
    pub cv_folds: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Accuracy matrix CSVs (rows: datasets, columns: classifiers); rows of
    /// several files are concatenated.
    #[arg(required = true)]
    pub matrices: Vec<PathBuf>,
    /// Significance level, 0.05 or 0.10.
    #[arg(long, default_value_t = 0.05)]
    pub level: f64,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// chi2, infogain or relief.
    #[arg(long)]
    pub method: Option<FilterMethod>,
    /// Attributes kept (default: all, in rank order).
    #[arg(long)]
    pub k: Option<usize>,
    /// Equal-width bins for chi2 and infogain (default 10).
    #[arg(long)]
    pub bins: Option<usize>,
    /// Instances sampled by relief (default 250).
    #[arg(long)]
    pub relief_samples: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub family: Family,
    /// Number of instances.
    #[arg(long, short)]
    pub n: usize,
    /// Number of attributes.
    #[arg(long, default_value_t = 20)]
    pub dimensions: usize,
    /// Output CSV (default: standard output).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    if let Some(n) = cli.threads.or(file.threads) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    commands::dispatch(&cli, &file)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
