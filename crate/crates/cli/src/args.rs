use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rankgauge::ingest::{MatrixFormat, DEFAULT_SAMPLES};
use rankgauge::metrics::{AlphaSource, DEFAULT_ENTROPY_EPSILON};
use rankgauge::PathChoice;
use rankgauge::RankOptions;

#[derive(Debug, Parser)]
#[command(name = "rankgauge", version, about = "Label-free effective-rank measurement for embedding matrices")]
pub struct Cli {
    /// Include wall-clock time in the JSON report (breaks byte-for-byte reproducibility).
    #[arg(long, global = true)]
    pub timing: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// RankMe, threshold rank and optionally alpha of one embedding matrix.
    Compute(ComputeArgs),
    /// Pick the best run of a hyperparameter sweep.
    Select(SelectArgs),
    /// RankMe as a function of the number of rows used.
    Converge(ConvergeArgs),
    /// Pearson correlation of labeled (x, y) pairs.
    Correlate(CorrelateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Npy,
    Csv,
    Raw,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PathArg {
    Auto,
    Direct,
    Gram,
}

impl From<PathArg> for PathChoice {
    fn from(p: PathArg) -> Self {
        match p {
            PathArg::Auto => PathChoice::Auto,
            PathArg::Direct => PathChoice::Direct,
            PathArg::Gram => PathChoice::Gram,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Rankme,
    Alpha,
}

/// How embedding files are read.
#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Input format; inferred from the extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,

    /// CSV input starts with a header row.
    #[arg(long)]
    pub has_header: bool,
}

impl InputArgs {
    pub fn matrix_format(&self) -> Option<MatrixFormat> {
        self.format.map(|f| match f {
            FormatArg::Npy => MatrixFormat::Npy,
            FormatArg::Csv => MatrixFormat::Csv {
                has_header: self.has_header,
            },
            FormatArg::Raw => MatrixFormat::Raw,
        })
    }
}

/// Estimation knobs shared by `compute` and on-the-fly ranks in `select`.
#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Rows drawn (without replacement) before the spectrum is computed.
    #[arg(long, default_value_t = DEFAULT_SAMPLES, value_parser = clap::value_parser!(usize))]
    pub samples: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Entropy epsilon added to each normalized singular value.
    #[arg(long, default_value_t = DEFAULT_ENTROPY_EPSILON)]
    pub epsilon: f64,

    /// Threshold-rank epsilon; defaults by input dtype.
    #[arg(long)]
    pub threshold_epsilon: Option<f64>,

    #[arg(long, value_enum, default_value_t = PathArg::Auto)]
    pub path: PathArg,

    /// Also fit the alpha power-law exponent.
    #[arg(long)]
    pub alpha: bool,

    /// Fit alpha on the centered covariance (true) or the raw second moment (false).
    #[arg(long, default_value_t = true, num_args = 0..=1, default_missing_value = "true",
          action = clap::ArgAction::Set)]
    pub centered: bool,
}

impl EstimateArgs {
    pub fn alpha_source(&self) -> AlphaSource {
        if self.centered {
            AlphaSource::CenteredCovariance
        } else {
            AlphaSource::RawSecondMoment
        }
    }

    pub fn rank_options(&self, with_alpha: bool) -> RankOptions {
        RankOptions {
            samples: self.samples,
            seed: self.seed,
            path: self.path.into(),
            entropy_epsilon: Some(self.epsilon),
            threshold_epsilon: self.threshold_epsilon,
            alpha: (with_alpha || self.alpha).then(|| self.alpha_source()),
        }
    }
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    /// Embedding matrix (.npy, .csv, or raw binary with a .json sidecar).
    #[arg(value_name = "PATH")]
    pub input: PathBuf,

    #[command(flatten)]
    pub estimate: EstimateArgs,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    /// Run manifest (JSON); runs without a rank are scored from `embeddings_path`.
    pub manifest: PathBuf,

    /// Relative tolerance under which two ranks count as tied.
    #[arg(long, default_value_t = 0.0)]
    pub tie_tol: f64,

    #[arg(long, value_enum, default_value_t = StrategyArg::Rankme)]
    pub strategy: StrategyArg,

    #[command(flatten)]
    pub estimate: EstimateArgs,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    /// Embedding matrix.
    #[arg(value_name = "PATH")]
    pub input: PathBuf,

    /// Strictly increasing subsample sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub sizes: Vec<usize>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value_t = DEFAULT_ENTROPY_EPSILON)]
    pub epsilon: f64,

    #[command(flatten)]
    pub read: InputArgs,

    /// Write the curve as CSV to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Print the curve as CSV on stdout instead of the JSON report.
    #[arg(long, conflicts_with = "out")]
    pub csv: bool,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    /// CSV with header `label,x,y`.
    pub pairs: PathBuf,
}
