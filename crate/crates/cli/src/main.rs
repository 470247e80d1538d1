//! `colortiger` command-line tool.
//!
//! Exit codes: 0 success, 2 usage, 3 data, 4 numerical.

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::settings::Settings;

/// Unsupervised illuminant estimation for linear RGB images.
#[derive(Parser, Debug)]
#[command(name = "colortiger", version, about, long_about = None)]
struct Cli {
    /// Worker threads for per-image work; results do not depend on it.
    #[arg(long, global = true, env = "COLORTIGER_THREADS")]
    threads: Option<usize>,

    /// key=value file supplying defaults for any long option (e.g. `n=8`,
    /// `bin-width=0.5`); flags on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run Gray-world, White-patch or Shades-of-Gray on one image or a corpus.
    Estimate(EstimateArgs),
    /// Learn two illumination centers from a corpus without ground truth.
    TrainCt(TrainCtArgs),
    /// Apply a Color Tiger model to a corpus.
    ApplyCt(ApplyArgs),
    /// Learn sensor gains from a corpus.
    Gains(GainsArgs),
    /// Learn gain-neutral centers on one sensor and gains for a target sensor.
    TrainCbt(TrainCbtArgs),
    /// Apply a Color Bengal Tiger model to a corpus.
    ApplyCbt(ApplyArgs),
    /// k-fold cross-validated Color Tiger evaluation.
    Eval(EvalArgs),
    /// Sets' Angular Error between ground truths and an estimator's output.
    Sae(SaeArgs),
    /// Nearest-angle histogram between estimates and ground truths.
    Hist(HistArgs),
    /// Generate a synthetic two-mode corpus.
    Synth(SynthArgs),
}

#[derive(Args, Debug, Clone)]
struct Input {
    /// Dataset manifest (CSV with header path,r,g,b).
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Preprocessing profile; overrides the manifest's `# profile=` line.
    #[arg(long)]
    profile: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct Learning {
    /// Largest Shades-of-Gray power in the sweep.
    #[arg(long)]
    n: Option<u32>,
    /// Trim fraction.
    #[arg(long)]
    t: Option<f64>,
    /// Seed for clustering and fold shuffles.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Method {
    Gw,
    Wp,
    Sog,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Source {
    Gw,
    Wp,
    Sog,
    /// Output of the model given by `--model`.
    Model,
    /// Pooled Shades-of-Gray estimates for powers 1..=n (histograms only).
    Sweep,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Direction {
    /// Angle from every estimate to its closest ground truth.
    EstToGt,
    /// Angle from every ground truth to its closest estimate.
    GtToEst,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[command(flatten)]
    input: Input,
    /// A single 16-bit PPM image instead of a manifest.
    #[arg(long, conflicts_with = "manifest")]
    image: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "gw")]
    method: Method,
    /// Minkowski power for `sog`.
    #[arg(long)]
    p: Option<u32>,
    /// Estimates CSV (path,r,g,b).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TrainCtArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    learning: Learning,
    /// Model file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ApplyArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long)]
    model: PathBuf,
    /// Estimates CSV (path,r,g,b).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GainsArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long)]
    n: Option<u32>,
    /// Gains file (r,g,b).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TrainCbtArgs {
    /// Training corpus (source sensor).
    #[command(flatten)]
    input: Input,
    /// Corpus from the target sensor, used only to learn its gains.
    #[arg(long)]
    target: PathBuf,
    #[command(flatten)]
    learning: Learning,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    learning: Learning,
    /// Take n, t and seed defaults from this Color Tiger model.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    folds: Option<usize>,
    /// Comma-separated training-set limits; switches to a train-size curve.
    #[arg(long, value_delimiter = ',')]
    train_limit: Option<Vec<usize>>,
    /// Random training subsets averaged per limit.
    #[arg(long)]
    draws: Option<usize>,
    /// Summary CSV, or curve CSV with `--train-limit`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-image estimates and errors (path,r,g,b,error).
    #[arg(long)]
    errors_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SaeArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum, default_value = "sog")]
    estimator: Source,
    #[arg(long)]
    p: Option<u32>,
    #[arg(long)]
    model: Option<PathBuf>,
    /// Assignment CSV (gt_index,estimate_index,angle).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct HistArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum, default_value = "sweep")]
    estimator: Source,
    #[arg(long)]
    p: Option<u32>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    model: Option<PathBuf>,
    /// Trim the sweep pool first (uses `--t` and `--seed`).
    #[arg(long)]
    trim: bool,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "est-to-gt")]
    direction: Direction,
    /// Bin width in degrees.
    #[arg(long)]
    bin_width: Option<f64>,
    /// Histogram CSV (bin_start,bin_end,percent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Output directory for images, manifest.csv and synth.cfg.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    /// Angle between the warm and cool modes, degrees.
    #[arg(long)]
    separation: Option<f64>,
    /// Angular jitter around each mode, degrees.
    #[arg(long)]
    spread: Option<f64>,
    /// Probability of the warm mode.
    #[arg(long)]
    mix: Option<f64>,
    /// Sensor gains as r,g,b.
    #[arg(long, value_delimiter = ',')]
    gains: Option<Vec<f64>>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    scene_cast: Option<f64>,
    #[arg(long)]
    outlier_fraction: Option<f64>,
    #[arg(long)]
    outlier_cast: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

/// Failure categories, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
        }
    }
}

impl From<colortiger::Error> for CliError {
    fn from(e: colortiger::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else if matches!(e, colortiger::Error::InvalidConfig(_)) {
            CliError::Usage(e.to_string())
        } else {
            CliError::Data(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let settings = match &cli.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    let threads = settings.pick("threads", cli.threads, 0)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {threads} worker threads: {e}")))?;
    pool.install(|| commands::dispatch(cli.command, &settings))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("colortiger: {e}");
            ExitCode::from(e.code())
        }
    }
}
