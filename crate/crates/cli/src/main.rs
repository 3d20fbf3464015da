//! `boltzknn` command-line front end.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use boltzknn::ErrorCategory;

#[derive(Debug, Parser)]
#[command(name = "boltzknn", version, about = "Bayesian k-nearest-neighbour classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample the posterior of (beta, k) and write a trace.
    Fit(FitArgs),
    /// Tabulate log Z(beta, k) by path sampling.
    Zgrid(ZgridArgs),
    /// Classify test points from a fitted trace.
    Predict(PredictArgs),
    /// Compare posterior traces of several methods on the same data.
    Compare(CompareArgs),
    /// Classical k-NN test errors and leave-one-out curve.
    Baseline(BaselineArgs),
    /// Mean agreement S/n over a ladder of beta values at fixed k.
    PhaseScan(PhaseScanArgs),
    /// Maximum pseudo-likelihood estimate of (beta, k).
    Pmle(PmleArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DataArgs {
    /// Training data: CSV with a header row, or whitespace-separated with a
    /// header line (any extension other than .csv).
    #[arg(long)]
    pub train: PathBuf,
    /// Label column (default: last column).
    #[arg(long)]
    pub label_column: Option<String>,
    /// Standardise covariates with the training means and deviations.
    #[arg(long)]
    pub standardize: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PriorArgs {
    /// Upper end of the uniform prior on beta.
    #[arg(long, default_value_t = 4.0)]
    pub beta_max: f64,
    /// Largest neighbourhood size K (default: smallest class size).
    #[arg(long)]
    pub k_max: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GridArgs {
    /// Number of equally spaced beta knots on [0, beta_max].
    #[arg(long, default_value_t = 50)]
    pub grid_beta_knots: usize,
    /// Comma-separated k knots (default: 1,10,20,...,110,125 rescaled to K).
    #[arg(long, value_delimiter = ',')]
    pub grid_k_knots: Option<Vec<usize>>,
    /// Gibbs sweeps per grid cell, burn-in included.
    #[arg(long, default_value_t = 10_000)]
    pub grid_sweeps: usize,
    #[arg(long, default_value_t = 500)]
    pub grid_burnin: usize,
    /// Integrate E[S] with piecewise quadratics instead of the trapezoid rule.
    #[arg(long)]
    pub grid_quadratic: bool,
    /// Reject the grid if the slope of E[S]/n jumps by more than this.
    #[arg(long)]
    pub grid_smoothness: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Pseudo,
    Path,
    MollerGibbs,
    MollerPerfect,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub prior: PriorArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::MollerGibbs)]
    pub method: MethodArg,
    /// Iterations (default: 50000 for pseudo/path, 20000 for Moller).
    #[arg(long)]
    pub iters: Option<usize>,
    /// Burn-in (default: 40000 for pseudo/path, 10000 for Moller).
    #[arg(long)]
    pub burnin: Option<usize>,
    /// Variance of the random walk on logit(beta / beta_max).
    #[arg(long, default_value_t = 0.05)]
    pub tau2: f64,
    /// Half-width of the k proposal.
    #[arg(long, default_value_t = 3)]
    pub r: usize,
    /// Gibbs sweeps per auxiliary draw (moller-gibbs).
    #[arg(long, default_value_t = 500)]
    pub inner_sweeps: usize,
    /// Iteration at which the plug-in is reset to the running mean; 0 never.
    #[arg(long, default_value_t = 10_000)]
    pub plugin_update_at: usize,
    /// Initial plug-in as `beta,k` (default: maximum pseudo-likelihood).
    #[arg(long, value_delimiter = ',')]
    pub plugin: Option<Vec<f64>>,
    /// Site-update budget of each perfect-sampling draw.
    #[arg(long, default_value_t = boltzknn::samplers::DEFAULT_CFTP_SITE_UPDATES)]
    pub cftp_max_site_updates: u64,
    /// Rejection-envelope beta for perfect sampling (default: 0.8 x the
    /// scanned saturation beta at the plug-in k).
    #[arg(long)]
    pub envelope_beta: Option<f64>,
    /// Required for moller-perfect, whose runtime can be very long.
    #[arg(long)]
    pub allow_perfect: bool,
    /// Existing grid for the path method (default: build one).
    #[arg(long)]
    pub zgrid: Option<PathBuf>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    /// Overwrite existing outputs.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ZgridArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub prior: PriorArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    /// Training data (default: as recorded in fit.json next to the trace).
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long)]
    pub label_column: Option<String>,
    #[arg(long)]
    pub standardize: bool,
    /// Points to classify; the label column is optional.
    #[arg(long)]
    pub test: PathBuf,
    /// Trace file (default: <out-dir>/trace.csv).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, default_value_t = 0.95)]
    pub credible_level: f64,
    /// Also write a level-set map over two covariates.
    #[arg(long)]
    pub map: bool,
    /// Covariate indices spanning the map (required when p != 2).
    #[arg(long, value_delimiter = ',')]
    pub map_axes: Option<Vec<usize>>,
    /// Map box as `x_lo,x_hi,y_lo,y_hi` (default: training range).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub map_box: Option<Vec<f64>>,
    /// Cells per axis.
    #[arg(long, default_value_t = 100)]
    pub map_resolution: usize,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// Trace files (at least two).
    #[arg(long = "trace", required = true)]
    pub traces: Vec<PathBuf>,
    #[command(flatten)]
    pub data: DataArgs,
    /// Test points for the per-point probability comparison.
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Histogram bins over [0, beta_max].
    #[arg(long, default_value_t = 40)]
    pub bins: usize,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub test: PathBuf,
    /// Comma-separated neighbourhood sizes.
    #[arg(long, value_delimiter = ',', default_value = "1,3,15,17,31,54")]
    pub k: Vec<usize>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PhaseScanArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub k: usize,
    /// Largest beta scanned.
    #[arg(long, default_value_t = 6.0)]
    pub beta_top: f64,
    #[arg(long, default_value_t = 31)]
    pub points: usize,
    #[arg(long, default_value_t = 200)]
    pub sweeps: usize,
    /// Agreement level that counts as saturated.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PmleArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub prior: PriorArgs,
}

/// Invalid combination of options.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<boltzknn::Error>() {
            return match e.category() {
                ErrorCategory::Config => 2,
                ErrorCategory::Data => 3,
                ErrorCategory::Numerical => 4,
            };
        }
    }
    3
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(a) => commands::fit(&a),
        Command::Zgrid(a) => commands::zgrid(&a),
        Command::Predict(a) => commands::predict(&a),
        Command::Compare(a) => commands::compare(&a),
        Command::Baseline(a) => commands::baseline(&a),
        Command::PhaseScan(a) => commands::phase_scan(&a),
        Command::Pmle(a) => commands::pmle(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
