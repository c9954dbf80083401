//! `darkwatch`: threat-table analysis and image detection pipelines.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric divergence.
//! Every run ends with a single-line JSON summary on stdout.

mod commands;
mod config;
mod error;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{ArgAction, Args, Parser, Subcommand};
use darkwatch_core::cnn::CnnTrainConfig;
use darkwatch_core::dataset::DEFAULT_SPLIT_RATIO;
use darkwatch_core::eda::DEFAULT_BINS;
use darkwatch_core::imaging::filters::DEFAULT_DENOISE;
use darkwatch_core::linear::{TrainConfig, DEFAULT_THRESHOLD};

use crate::error::CliError;
use crate::output::Summary;

#[derive(Debug, Parser)]
#[command(
    name = "darkwatch",
    version,
    about = "Threat-table classification and image-based detection",
    after_help = "Output directories default to $DARKWATCH_OUT/<command> when --out is omitted.\n\
                  Exit codes: 0 ok, 1 usage error, 2 data error, 3 numeric divergence."
)]
pub struct Cli {
    /// File of `key = value` lines supplying flag defaults; command-line flags win
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a threat CSV for missing values and malformed rows
    #[command(args_override_self = true)]
    Validate(ValidateArgs),
    /// Summary statistics as report.json plus six SVG charts
    #[command(args_override_self = true)]
    Eda(EdaArgs),
    /// Train logistic regression or a linear SVM and score it on the held-out split
    #[command(args_override_self = true)]
    Train(TrainArgs),
    /// Re-score a saved model on the same split of a dataset
    #[command(args_override_self = true)]
    Evaluate(EvaluateArgs),
    /// Rank metrics files by accuracy and chart them
    #[command(args_override_self = true)]
    Compare(CompareArgs),
    /// Image pipeline stages
    #[command(subcommand)]
    Img(ImgCommand),
}

#[derive(Debug, Subcommand)]
pub enum ImgCommand {
    /// Denoise a PGM/PPM image
    #[command(args_override_self = true)]
    Denoise(DenoiseArgs),
    /// Extract a HOG descriptor
    #[command(args_override_self = true)]
    Hog(HogArgs),
    /// Train an image classifier on a labeled corpus directory
    #[command(args_override_self = true)]
    Train(ImgTrainArgs),
    /// Classify one image with a trained pipeline
    #[command(args_override_self = true)]
    Classify(ClassifyArgs),
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Threat CSV
    #[arg(long)]
    pub data: PathBuf,
}

#[derive(Debug, Args)]
pub struct EdaArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Impact-level histogram bins over [0, 100]
    #[arg(long, default_value_t = DEFAULT_BINS)]
    pub bins: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LinearFlags {
    #[arg(long, default_value_t = TrainConfig::default().learning_rate)]
    pub lr: f64,
    #[arg(long, default_value_t = TrainConfig::default().epochs)]
    pub epochs: usize,
    /// L2 penalty for logistic regression
    #[arg(long, default_value_t = TrainConfig::default().l2_strength)]
    pub l2: f64,
    /// Regularization strength for the SVM
    #[arg(long, default_value_t = TrainConfig::default().svm_lambda)]
    pub lambda: f64,
    /// Stop when successive losses differ by less than this
    #[arg(long, default_value_t = TrainConfig::default().tolerance)]
    pub tolerance: f64,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// logistic | svm
    #[arg(long, default_value = "logistic")]
    pub model: String,
    #[arg(long)]
    pub data: PathBuf,
    /// Fraction of rows used for training
    #[arg(long, default_value_t = DEFAULT_SPLIT_RATIO)]
    pub split: f64,
    #[arg(long)]
    pub seed: u64,
    /// Min-max scale the numeric columns
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub scale: bool,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[command(flatten)]
    pub linear: LinearFlags,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// model.json written by `train`
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SPLIT_RATIO)]
    pub split: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// metrics.json files
    #[arg(required = true, num_args = 2..)]
    pub files: Vec<PathBuf>,
    /// Display names, comma separated, in file order
    #[arg(long, value_delimiter = ',')]
    pub names: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// median:<radius> | gaussian:<sigma> | none
    #[arg(long, default_value = DEFAULT_DENOISE)]
    pub filter: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HogFlags {
    /// Cell side in pixels
    #[arg(long, default_value_t = 8)]
    pub cell_size: usize,
    /// Block side in cells
    #[arg(long, default_value_t = 2)]
    pub block_size: usize,
    #[arg(long, default_value_t = 9)]
    pub bins: usize,
    /// Orientations over 0-360 degrees instead of 0-180
    #[arg(long, default_value_t = false, action = ArgAction::Set)]
    pub signed: bool,
}

#[derive(Debug, Args)]
pub struct HogArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Filter applied before extraction
    #[arg(long, default_value = "none")]
    pub denoise: String,
    #[command(flatten)]
    pub hog: HogFlags,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ImgTrainArgs {
    /// Directory holding labels.csv and the images it lists
    #[arg(long)]
    pub corpus: PathBuf,
    /// raw-cnn | hog-linear (alias hog+dense)
    #[arg(long, default_value = "raw-cnn")]
    pub mode: String,
    #[arg(long, default_value = DEFAULT_DENOISE)]
    pub denoise: String,
    #[arg(long)]
    pub seed: u64,
    /// Defaults: 200 for raw-cnn, 2000 for hog-linear
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Defaults: 0.05 for raw-cnn, 0.1 for hog-linear
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long, default_value_t = CnnTrainConfig::default().batch_size)]
    pub batch_size: usize,
    /// Convolution kernel side
    #[arg(long, default_value_t = 3)]
    pub kernel: usize,
    /// Convolution output channels
    #[arg(long, default_value_t = 4)]
    pub channels: usize,
    /// Linear head for hog-linear: logistic | svm
    #[arg(long, default_value = "logistic")]
    pub head: String,
    #[command(flatten)]
    pub hog: HogFlags,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// model.json written by `img train`
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate(_) => "validate",
            Command::Eda(_) => "eda",
            Command::Train(_) => "train",
            Command::Evaluate(_) => "evaluate",
            Command::Compare(_) => "compare",
            Command::Img(ImgCommand::Denoise(_)) => "img denoise",
            Command::Img(ImgCommand::Hog(_)) => "img hog",
            Command::Img(ImgCommand::Train(_)) => "img train",
            Command::Img(ImgCommand::Classify(_)) => "img classify",
        }
    }
}

fn emit(command: &str, summary: Summary, result: Result<(), CliError>) -> i32 {
    if let Err(e) = &result {
        eprintln!("darkwatch: error: {e}");
    }
    let (line, code) = summary.finish(command, &result);
    println!("{line}");
    code
}

pub fn run(args: Vec<OsString>) -> i32 {
    let args = match config::expand_args(args) {
        Ok(a) => a,
        Err(e) => return emit("darkwatch", Summary::default(), Err(e)),
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return emit("darkwatch", Summary::default(), Ok(()));
            }
            let _ = e.print();
            let first = e.kind().as_str().unwrap_or("invalid arguments").to_string();
            let (line, code) = Summary::default().finish("darkwatch", &Err(CliError::Usage(first)));
            println!("{line}");
            return code;
        }
    };
    let name = cli.command.name();
    let mut summary = Summary::default();
    let result = commands::dispatch(cli.command, &mut summary);
    emit(name, summary, result)
}

fn main() {
    std::process::exit(run(std::env::args_os().collect()));
}
