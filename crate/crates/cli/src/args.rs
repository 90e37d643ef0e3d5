use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "sysid", version, about = "Sparse system identification from trajectory data")]
pub struct Cli {
    /// Print reports to stdout as JSON instead of tables.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset as CSV.
    Gen(GenArgs),
    /// Report the identification degree and the rank trace behind it.
    Degree(DegreeArgs),
    /// Identify a lag-embedded linear model and write it with its bound report.
    Identify(IdentifyArgs),
    /// Forecast with an identified model.
    Predict(PredictArgs),
    /// Identify a sparse vector field over a feature dictionary.
    IdentifyOde(IdentifyOdeArgs),
    /// Integrate identified dynamics from an initial state.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    /// Period-32 scalar triangle wave.
    Triangle,
    /// Three coupled Duffing oscillators (6 columns).
    Duffing,
    /// Discretized NLSE soliton on the default grid (161 complex columns).
    Nlse,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    pub kind: GenKind,
    /// Number of samples [default: triangle 257, duffing 5001, nlse 40].
    #[arg(long = "T", value_name = "T")]
    pub samples: Option<usize>,
    /// Sample spacing [default: triangle 1, duffing 1e-3, nlse 1e-2].
    #[arg(long)]
    pub dt: Option<f64>,
    /// Standard deviation of added gaussian noise; no noise when absent.
    #[arg(long)]
    pub noise_scale: Option<f64>,
    /// Seed for the noise generator.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// NLSE nonlinearity.
    #[arg(long, default_value_t = 1.0)]
    pub q: f64,
    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Input CSV (header row, optional leading `t` column).
    #[arg(long = "in", value_name = "CSV")]
    pub input: PathBuf,
    /// Resample irregular timestamps onto this spacing with a cubic spline.
    #[arg(long, value_name = "DT")]
    pub resample_dt: Option<f64>,
    /// End condition of the resampling spline.
    #[arg(long, value_enum, default_value_t = Spline::Natural, requires = "resample_dt")]
    pub spline: Spline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Spline {
    /// Zero second derivative at both ends.
    Natural,
    /// Continuous third derivative at the second and second-to-last knots.
    NotAKnot,
}

#[derive(Debug, Args)]
pub struct DegreeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Singular-value threshold.
    #[arg(long)]
    pub delta: f64,
    /// `trivial`, `d3`, or a JSON file with a list of row-major matrices.
    #[arg(long, default_value = "trivial")]
    pub group: String,
    /// Accept a group file that fails the closure and unitarity checks.
    #[arg(long)]
    pub allow_inexact_group: bool,
    /// Largest lag examined [default: (T + 1) / 2].
    #[arg(long)]
    pub max_lag: Option<usize>,
}

#[derive(Debug, Args)]
pub struct IdentifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Singular-value threshold.
    #[arg(long)]
    pub delta: f64,
    /// Coefficients at or below this modulus do not count toward a support.
    #[arg(long)]
    pub epsilon: f64,
    /// Smallest lag used.
    #[arg(long, default_value_t = 1)]
    pub lag_min: usize,
    /// Largest lag examined by the degree search.
    #[arg(long)]
    pub max_lag: Option<usize>,
    /// Solver sweep limit [default: n L].
    #[arg(long)]
    pub max_sweeps: Option<usize>,
    /// `trivial`, `d3`, or a JSON file with a list of row-major matrices.
    #[arg(long, default_value = "trivial")]
    pub group: String,
    /// Accept a group file that fails the closure and unitarity checks.
    #[arg(long)]
    pub allow_inexact_group: bool,
    /// Where to write the model.
    #[arg(long)]
    pub model_out: PathBuf,
    /// Where to write the bound report [default: next to the model, `.report.json`].
    #[arg(long)]
    pub report_out: Option<PathBuf>,
    /// Increase the lag until the forecast RMSE reaches --rmse-target.
    #[arg(long, requires = "rmse_target")]
    pub auto_escalate: bool,
    /// RMSE that stops the escalation.
    #[arg(long, requires = "auto_escalate")]
    pub rmse_target: Option<f64>,
    /// Largest lag tried while escalating [default: (T + 1) / 2].
    #[arg(long, requires = "auto_escalate")]
    pub lag_cap: Option<usize>,
    /// Trailing samples held out to score each lag while escalating; without
    /// it the training samples are replayed.
    #[arg(long, default_value_t = 0, requires = "auto_escalate")]
    pub holdout: usize,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Model written by `identify`.
    #[arg(long)]
    pub model: PathBuf,
    /// Number of forecast samples (x_2 onward).
    #[arg(long)]
    pub steps: usize,
    /// Use the group-averaged operator.
    #[arg(long)]
    pub symmetrized: bool,
    /// Start from the initial state moved by this group element.
    #[arg(long, value_name = "INDEX")]
    pub orbit: Option<usize>,
    /// Full reference trajectory starting at x_1, for an RMSE report.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// First truth sample (0-based) included in the RMSE.
    #[arg(long, default_value_t = 1, requires = "truth")]
    pub score_from: usize,
    /// Where to write the RMSE report.
    #[arg(long, requires = "truth")]
    pub report_out: Option<PathBuf>,
    /// Forecast CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Boundary {
    /// Leave out samples where the stencil does not fit.
    DropEndpoints,
    /// Keep every sample, zero where the stencil does not fit.
    ZeroPadMasked,
}

#[derive(Debug, Args)]
pub struct IdentifyOdeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Dictionary JSON file, or `builtin:duffing[:P]` / `builtin:nlse[:P]`.
    #[arg(long)]
    pub dict: String,
    /// Finite-difference order: 1, 2 or 4.
    #[arg(long, default_value_t = 4)]
    pub fd_order: usize,
    #[arg(long, value_enum, default_value_t = Boundary::DropEndpoints)]
    pub boundary: Boundary,
    /// Comma-separated components whose derivative is forced to zero.
    #[arg(long, value_delimiter = ',')]
    pub pinned: Vec<usize>,
    /// Use only the first N samples.
    #[arg(long, value_name = "N")]
    pub train_samples: Option<usize>,
    /// Singular-value threshold.
    #[arg(long)]
    pub delta: f64,
    /// Coefficients at or below this modulus do not count toward a support.
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 30)]
    pub max_sweeps: usize,
    /// Scale every feature column to unit norm before solving.
    #[arg(long)]
    pub scale_columns: bool,
    /// Where to write the identified dynamics.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("start").required(true).args(["x0", "x0_from"])))]
pub struct SimulateArgs {
    /// Dynamics written by `identify-ode`.
    #[arg(long)]
    pub dynamics: PathBuf,
    /// Comma-separated real initial state.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x0: Vec<f64>,
    /// Take the initial state from a row of this CSV instead.
    #[arg(long, value_name = "CSV")]
    pub x0_from: Option<PathBuf>,
    /// Row of --x0-from (0-based sample index).
    #[arg(long, default_value_t = 0, requires = "x0_from")]
    pub row: usize,
    #[arg(long)]
    pub dt: f64,
    #[arg(long)]
    pub steps: usize,
    /// Output CSV, including the initial state.
    #[arg(long)]
    pub out: PathBuf,
}
