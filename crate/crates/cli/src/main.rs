//! `diazoir`: featurise diazo compounds, train the stacked model, predict,
//! explain and run the robustness experiments.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "diazoir", version, about = "Diazo IR wavenumber prediction toolkit")]
pub struct Cli {
    /// TOML config file; unknown keys are rejected.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Built-in preset when no config file is given: default or benchmark.
    #[arg(long, global = true, value_name = "NAME")]
    pub preset: Option<String>,
    /// Override the config seed. Every random choice derives from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Cap the number of worker threads.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Treat every row-level ingestion problem as fatal instead of skipping the row.
    #[arg(long, global = true)]
    pub strict: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write the feature matrix of a dataset plus a layout sidecar.
    Featurize(FeaturizeArgs),
    /// Fit the mixture model on the training split and save it.
    Train(TrainArgs),
    /// Predict wavenumbers for one SMILES or a CSV of SMILES.
    Predict(PredictArgs),
    /// SHAP contributions for one SMILES, or mean |SHAP| over a dataset.
    Explain(ExplainArgs),
    /// Score a saved model on a dataset.
    Eval(EvalArgs),
    /// Group held-out rows by Tanimoto similarity to the training rows.
    Similarity(SimilarityArgs),
    /// Refit under increasing Gaussian noise.
    Noise(NoiseArgs),
    /// Refit on growing fractions of the training split.
    Curve(CurveArgs),
    /// Generate a labelled synthetic dataset.
    GenSynthetic(GenArgs),
}

#[derive(Args, Debug)]
pub struct FeaturizeArgs {
    /// Input CSV with `id,smiles,wavenumber_cm1` columns.
    #[arg(long, value_name = "CSV")]
    pub input: PathBuf,
    /// Feature matrix CSV to write.
    #[arg(long, value_name = "CSV")]
    pub output: PathBuf,
    /// Layout sidecar path; defaults to the output path with `.layout.json`.
    #[arg(long, value_name = "FILE")]
    pub layout: Option<PathBuf>,
    /// One row per diazo group instead of the primary group only.
    #[arg(long)]
    pub all_diazo: bool,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long, value_name = "CSV")]
    pub input: PathBuf,
    /// Model file to write.
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    /// Training report; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false, id = "source")]
pub struct PredictSource {
    #[arg(long)]
    pub smiles: Option<String>,
    /// CSV with a `smiles` column and optionally an `id` column.
    #[arg(long, value_name = "CSV")]
    pub input: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    #[command(flatten)]
    pub source: PredictSource,
    /// Prediction CSV; stdout when omitted.
    #[arg(long, value_name = "CSV")]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExplainArgs {
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    #[arg(long, required_unless_present = "input", conflicts_with = "input")]
    pub smiles: Option<String>,
    /// Dataset for a global mean |SHAP| ranking.
    #[arg(long, value_name = "CSV")]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub top_k: usize,
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SubsetArg {
    /// Held-out rows when the input is the training dataset, otherwise all rows.
    Auto,
    Test,
    All,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    #[arg(long, value_name = "CSV")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = SubsetArg::Auto)]
    pub subset: SubsetArg,
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
    /// Per-row predictions as CSV.
    #[arg(long, value_name = "CSV")]
    pub predictions: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimilarityArgs {
    #[arg(long, value_name = "CSV")]
    pub input: PathBuf,
    /// Model trained on `--input`; its split is reused. A model is trained when omitted.
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
    /// Group table as CSV.
    #[arg(long, value_name = "CSV")]
    pub csv: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    Features,
    Labels,
    Both,
}

#[derive(Args, Debug)]
pub struct NoiseArgs {
    #[arg(long, value_name = "CSV")]
    pub input: PathBuf,
    /// Repeats per noise level; overrides the config.
    #[arg(long)]
    pub repeats: Option<usize>,
    /// What receives the noise; overrides the config.
    #[arg(long, value_enum)]
    pub target: Option<TargetArg>,
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
    #[arg(long, value_name = "CSV")]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CurveArgs {
    #[arg(long, value_name = "CSV")]
    pub input: PathBuf,
    /// Also cross-validate at every fraction.
    #[arg(long)]
    pub cv: bool,
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
    #[arg(long, value_name = "CSV")]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, default_value_t = 1500)]
    pub n: usize,
    /// Label noise standard deviation in cm⁻¹.
    #[arg(long, default_value_t = 3.0)]
    pub noise_sd: f64,
    /// Dataset CSV; stdout when omitted.
    #[arg(long, value_name = "CSV")]
    pub output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
