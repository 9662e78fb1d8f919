use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qse_core::DEFAULT_SEED;

#[derive(Parser, Debug)]
#[command(name = "qse", version, about = "Differential entropy estimation from samples")]
pub struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true, env = "QSE_WORKERS")]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Estimate the entropy of a sample file.
    Estimate(EstimateArgs),
    /// Write draws from a distribution, one per line.
    Sample(SampleArgs),
    /// Print the likelihood-tuned hyperparameter for a sample file.
    Tune(TuneArgs),
    /// Run a figure experiment and write its result table.
    Figure(FigureArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodArg {
    Qs,
    Bc,
    Kd,
}

#[derive(ValueEnum, Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Args, Debug)]
pub struct QsArgs {
    /// Quantile count as a fraction of the sample size.
    #[arg(long, default_value_t = 0.25, conflicts_with = "n_quantiles")]
    pub alpha: f64,
    /// Fixed number of quantile intervals N_Z.
    #[arg(long)]
    pub n_quantiles: Option<usize>,
    /// Subsets averaged per quantile (N_K).
    #[arg(long, default_value_t = 500)]
    pub n_subsamples: usize,
    /// Bootstrap replicates (N_B).
    #[arg(long, default_value_t = 500)]
    pub n_bootstrap: usize,
}

#[derive(Args, Debug)]
pub struct BcArgs {
    /// Number of equal-width bins (default: tuned).
    #[arg(long, conflicts_with = "bin_width")]
    pub bins: Option<usize>,
    /// Bin width; rounded to a whole number of bins over the range.
    #[arg(long)]
    pub bin_width: Option<f64>,
}

#[derive(Args, Debug)]
pub struct KdArgs {
    /// Kernel standard deviation (default: tuned).
    #[arg(long, conflicts_with = "capital_k")]
    pub sigma: Option<f64>,
    /// Bandwidth as K with sigma = K / sqrt(N_S).
    #[arg(long)]
    pub capital_k: Option<f64>,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    /// Sample file, one value per line (`-` for stdin).
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    #[command(flatten)]
    pub qs: QsArgs,
    #[command(flatten)]
    pub bc: BcArgs,
    #[command(flatten)]
    pub kd: KdArgs,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    /// Read this CSV column (header name or zero-based index).
    #[arg(long)]
    pub csv_column: Option<String>,
    /// Report entropy in bits instead of nats.
    #[arg(long)]
    pub bits: bool,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    /// Distribution as JSON, e.g. '{"type":"gaussian","mu":0,"sigma":1}'.
    #[arg(long)]
    pub dist: String,
    #[arg(short, long)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TuneArgs {
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    #[arg(long)]
    pub csv_column: Option<String>,
}

#[derive(Args, Debug)]
pub struct FigureArgs {
    #[arg(value_parser = clap::value_parser!(u32).range(1..=12))]
    pub id: u32,
    #[arg(long, default_value_t = qse_bench::config::DEFAULT_REPETITIONS)]
    pub reps: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Sample sizes, comma separated (default: the standard six).
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}
