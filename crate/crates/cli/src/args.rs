use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "entropic-map",
    version,
    about = "Sparse multinomial MAP estimation under an entropic prior"
)]
pub struct Cli {
    /// Include wall-clock duration in the report (makes output non-reproducible).
    #[arg(long, global = true)]
    pub timing: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the entropic MAP estimate of one count vector.
    Fit(FitArgs),
    /// Exhaustive grid search for the MAP on a small simplex (K <= 4).
    Oracle(OracleArgs),
    /// Compare solver and grid oracle over several prior strengths.
    Compare(CompareArgs),
    /// Run the PLSI/PLCA EM demo on a count matrix.
    Plsi(PlsiArgs),
    /// Generate a synthetic count matrix and its ground-truth factors.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CountsInput {
    /// Inline comma-separated counts, e.g. `6,4`.
    #[arg(long, conflicts_with = "input")]
    pub counts: Option<String>,

    /// File with one count per line or a single comma-separated row.
    #[arg(required_unless_present = "counts")]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Constant nu, or the maximum of a geometric schedule when --nu-init/--nu-growth is given.
    #[arg(long)]
    pub nu: Option<f64>,

    /// Starting nu of a geometric schedule.
    #[arg(long)]
    pub nu_init: Option<f64>,

    /// Per-iteration growth factor of a geometric schedule.
    #[arg(long)]
    pub nu_growth: Option<f64>,

    /// Convergence threshold on the L-infinity change of theta.
    #[arg(long, allow_hyphen_values = true)]
    pub tol: Option<f64>,

    #[arg(long)]
    pub max_iter: Option<usize>,

    /// Lower clamp on theta before exponentiation and logs, in [0, 1e-6].
    #[arg(long, allow_hyphen_values = true)]
    pub floor: Option<f64>,

    /// `smoothed-ml`, `uniform`, or an explicit comma-separated starting point.
    #[arg(long)]
    pub init: Option<String>,

    /// Relative multiplicative perturbation of the starting point, in [0, 1e-3].
    #[arg(long, allow_hyphen_values = true)]
    pub jitter: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: CountsInput,

    /// Prior strength (>= 0).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub a: f64,

    #[command(flatten)]
    pub solver: SolverArgs,

    /// Seed for the jitter generator.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Record per-iteration diagnostics in the report.
    #[arg(long)]
    pub trace: bool,

    /// Write the report here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub input: CountsInput,

    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub a: f64,

    /// Grid step (defaults: 1e-6 for K=2, 1e-3 for K=3, 1e-2 for K=4).
    #[arg(long, allow_hyphen_values = true)]
    pub resolution: Option<f64>,

    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: CountsInput,

    /// Comma-separated prior strengths.
    #[arg(long, default_value = "0,1,5", allow_hyphen_values = true)]
    pub a_list: String,

    #[command(flatten)]
    pub solver: SolverArgs,

    /// Grid step (defaults: 1e-6 for K=2, 1e-3 for K=3, 1e-2 for K=4).
    #[arg(long, allow_hyphen_values = true)]
    pub resolution: Option<f64>,

    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlsiArgs {
    /// Comma-separated matrix, one feature row per line, no header.
    pub matrix: PathBuf,

    #[arg(long, default_value_t = 2)]
    pub components: usize,

    /// Entropic strength on the activations.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub a: f64,

    #[arg(long, default_value_t = 50)]
    pub em_iters: usize,

    /// Seed for the dictionary initialization and any solver jitter.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[command(flatten)]
    pub solver: SolverArgs,

    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Number of features (matrix rows).
    #[arg(long = "f", default_value_t = 8)]
    pub features: usize,

    /// Number of columns.
    #[arg(long = "t", default_value_t = 20)]
    pub columns: usize,

    /// Number of latent components.
    #[arg(long = "z", default_value_t = 2)]
    pub components: usize,

    /// Active components per column.
    #[arg(long, default_value_t = 1)]
    pub sparsity: usize,

    /// Relative weight of off-block features in each dictionary entry (0 = disjoint).
    #[arg(long, allow_hyphen_values = true)]
    pub overlap: Option<f64>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Matrix file to write.
    #[arg(long)]
    pub output: PathBuf,

    /// Ground-truth factor file (default: `<output>.truth.json`).
    #[arg(long)]
    pub truth: Option<PathBuf>,
}
