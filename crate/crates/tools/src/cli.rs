//! Command-line definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "ptosis", version, about = "Eyelid droop (ptosis) measurement and classification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Measure MRD1 and iris ratio for the eyes of one image, or for a synthetic suite.
    Measure(MeasureArgs),
    /// Apply a fitted model (and the deep-probability fusion) to a report or feature table.
    Classify(ClassifyArgs),
    /// Fit a classifier on a feature table.
    Fit(FitArgs),
    /// Render a synthetic suite with ground truth.
    Synth(SynthArgs),
    /// Compare predictions against ground truth.
    Eval(EvalArgs),
    /// Export the seven-channel feature stack of each eye crop.
    Features(FeaturesArgs),
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// Landmark file; its `image` entry names the image unless --image is given.
    #[arg(long, required_unless_present = "suite", conflicts_with = "suite")]
    pub landmarks: Option<PathBuf>,
    #[arg(long, requires = "landmarks")]
    pub image: Option<PathBuf>,
    /// Suite directory written by `synth`; produces a feature table.
    #[arg(long)]
    pub suite: Option<PathBuf>,
    /// Assumed horizontal iris diameter.
    #[arg(long, default_value_t = ptosis_core::clinical::DEFAULT_IRIS_DIAMETER_MM)]
    pub iris_mm: f64,
    /// Crop margin as a fraction of the eye outline's larger side.
    #[arg(long, default_value_t = ptosis_core::image::DEFAULT_CROP_MARGIN)]
    pub margin: f64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Diagnosis report (JSON) or feature table (CSV).
    pub input: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// CSV `side,p1,...,pk` of deep-model probabilities, averaged per eye.
    #[arg(long)]
    pub p_deep: Option<PathBuf>,
    /// Band of deep probabilities handed to the model.
    #[arg(long, num_args = 2, value_names = ["T_LO", "T_HI"], allow_negative_numbers = true)]
    pub fusion: Option<Vec<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitMethod {
    ThresholdMrd1,
    ThresholdIr,
    Tree,
    Logistic,
}

impl FitMethod {
    pub fn name(self) -> &'static str {
        match self {
            FitMethod::ThresholdMrd1 => "threshold-mrd1",
            FitMethod::ThresholdIr => "threshold-ir",
            FitMethod::Tree => "tree",
            FitMethod::Logistic => "logistic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    Accuracy,
    BalancedAccuracy,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Feature table with header `p_deep,mrd1_mm,iris_ratio_pct,label`.
    pub data: PathBuf,
    #[arg(long, value_enum)]
    pub model: FitMethod,
    #[arg(long)]
    pub out: PathBuf,
    /// Seeds the train/validation shuffle.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.0)]
    pub validation_fraction: f64,
    /// Comma-separated feature names for tree and logistic models.
    #[arg(long, value_delimiter = ',')]
    pub features: Option<Vec<String>>,
    #[arg(long, value_enum, default_value = "balanced-accuracy")]
    pub objective: ObjectiveArg,
    #[arg(long, default_value_t = 3)]
    pub max_depth: usize,
    #[arg(long, default_value_t = 5)]
    pub min_leaf: usize,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Lowest upper-lid apex height above the iris centre.
    #[arg(long, default_value_t = -1.5, allow_negative_numbers = true)]
    pub lid_min_mm: f64,
    #[arg(long, default_value_t = 6.0, allow_negative_numbers = true)]
    pub lid_max_mm: f64,
    #[arg(long, default_value_t = 40.0)]
    pub radius_min: f64,
    #[arg(long, default_value_t = 80.0)]
    pub radius_max: f64,
    #[arg(long, default_value_t = 8.0)]
    pub noise_max: f64,
    /// Largest reflex offset from the iris centre, as a fraction of the radius.
    #[arg(long, default_value_t = 0.15)]
    pub clr_offset_frac: f64,
    /// Standard deviation of contour landmark jitter.
    #[arg(long, default_value_t = 0.0)]
    pub jitter_px: f64,
    /// Probability that an eye carries a secondary glint in the lower iris.
    #[arg(long, default_value_t = 0.0)]
    pub glint_rate: f64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Text,
    Csv,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Prediction tables (`id,prediction,score[,decision_path]`); each becomes one row.
    #[arg(required = true)]
    pub predictions: Vec<PathBuf>,
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    pub format: TableFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StackFormat {
    /// One binary file per eye with a header.
    Raw,
    /// Seven PGM files per eye.
    Pgm,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    #[arg(long)]
    pub landmarks: PathBuf,
    #[arg(long)]
    pub image: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "raw")]
    pub format: StackFormat,
    #[arg(long, default_value_t = ptosis_core::image::DEFAULT_CROP_MARGIN)]
    pub margin: f64,
}
