use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "firehash",
    version,
    about = "Hashing-based outlier scoring, outlier metrics and drift-aware stream classification",
    after_help = "Outputs given as `-` go to stdout. Exit codes: 0 success, 1 usage error, 2 data or validation error."
)]
pub struct Cli {
    /// Print progress and summaries to stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score every row of a CSV with FiRE or FiRE.1 (higher = more outlying).
    Score(ScoreArgs),
    /// Score new rows against a saved FiRE.1 model without updating it.
    ScoreUnseen(ScoreUnseenArgs),
    /// o-scores of labelled outliers and their 20-bin histogram.
    Oscore(OscoreArgs),
    /// P@n, adjusted P@n, AP, adjusted AP and ROC-AUC of a scores file.
    Eval(EvalArgs),
    /// Friedman mean ranks of methods from per-measure tables.
    Rank(RankArgs),
    /// Prequential (test-then-train) evaluation of Enhash on a labelled stream.
    Stream(StreamArgs),
    /// Write a seeded synthetic dataset or stream as CSV (features..., label).
    Gen(GenArgs),
    /// Time fit + score on generated data of increasing size.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Fire,
    Fire1,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long, value_enum)]
    pub algo: Algo,
    #[arg(long)]
    pub input: PathBuf,
    /// Column excluded from the features (e.g. ground-truth labels).
    #[arg(long)]
    pub label_col: Option<String>,
    /// Estimators [default: 100].
    #[arg(long = "L")]
    pub estimators: Option<usize>,
    /// Sampled dimensions per estimator [default: 50 for fire, d for fire1].
    #[arg(long = "M")]
    pub sampled_dims: Option<usize>,
    /// Prime hash-table size (fire only).
    #[arg(long = "H", default_value_t = 1_017_881)]
    pub modulus: u64,
    /// Quantization width (fire1 only).
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    pub bin_width: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Add a `rare` column from the IQR rule (score >= q3 + 1.5 IQR).
    #[arg(long)]
    pub iqr_flag: bool,
    /// Save the fitted model as JSON.
    #[arg(long)]
    pub save_model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScoreUnseenArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub label_col: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OscoreArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Outlier label column (1/0, true/false, outlier/inlier, yes/no).
    #[arg(long)]
    pub label_col: String,
    #[arg(long, default_value_t = 10)]
    pub phi: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// CSV with a `score` column.
    #[arg(long)]
    pub scores: PathBuf,
    /// CSV with an outlier label column, row-aligned with the scores.
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long, default_value = "label")]
    pub label_col: String,
    /// Cut-off for P@n [default: number of outliers].
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    /// Directory of `<measure>.csv` files with rows `method,<dataset>...`.
    #[arg(long)]
    pub tables: PathBuf,
    /// Measures (file stems) where smaller values are better. Repeatable.
    #[arg(long, value_name = "MEASURE")]
    pub lower_is_better: Vec<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StreamVariant {
    Full,
    /// Forces lambda = 0 (no forgetting).
    Lambda0,
    /// Drops the 1/dist factor; remaining ties broken at random (seeded).
    Noweights,
}

#[derive(Debug, Args)]
pub struct StreamArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub label_col: String,
    #[arg(long = "L", default_value_t = 10)]
    pub estimators: usize,
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    pub bin_width: f64,
    #[arg(long, default_value_t = 0.015, allow_hyphen_values = true)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value_t = StreamVariant::Full)]
    pub variant: StreamVariant,
    #[arg(long)]
    pub seed: u64,
    /// Add a trailing-window error series of this width.
    #[arg(long)]
    pub window: Option<usize>,
    /// Include wall-clock time (makes the report non-reproducible).
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Planted,
    Abrupt,
    Incremental,
    Virtual,
    Recurring,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: GenKind,
    /// Samples for streams; total inliers for `planted` [default: 250].
    #[arg(long)]
    pub n: Option<usize>,
    /// Stream dimension.
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Drift points for abrupt/recurring streams [default: n/2].
    #[arg(long, value_delimiter = ',')]
    pub drift_at: Vec<usize>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub algo: Algo,
    /// Strictly ascending row counts, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    #[arg(long = "L", default_value_t = 100)]
    pub estimators: usize,
    /// [default: 50 for fire, 20 (all features) for fire1]
    #[arg(long = "M")]
    pub sampled_dims: Option<usize>,
    #[arg(long = "H", default_value_t = 1_017_881)]
    pub modulus: u64,
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    pub bin_width: f64,
    /// Timed repetitions per size; the median is reported.
    #[arg(long, default_value_t = 3)]
    pub trials: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}
