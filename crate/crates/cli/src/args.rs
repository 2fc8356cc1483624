use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sparselogit::analysis::SummaryMode;
use sparselogit::model::{ScaleMixture, DEFAULT_SIGMA0_SQ};
use sparselogit::{McmcSettings, PriorFamily, PriorSpec};

/// Sparse multinomial logistic regression with per-feature shrinkage priors, sampled by
/// HMC within Gibbs.
#[derive(Debug, Parser)]
#[command(name = "sparselogit", version, propagate_version = true)]
pub struct Cli {
    /// Worker threads for parallel CV folds and path grid points [default: all cores]
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub jobs: Option<u32>,

    /// Suppress progress lines on standard error
    #[arg(long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate train and test CSVs from one of the two synthetic designs
    Simulate(SimulateArgs),
    /// Run a chain on a training CSV; writes the sample store, summary and metrics
    Fit(FitArgs),
    /// Re-summarize and rank features from an existing sample store
    Rank(RankArgs),
    /// Score a test CSV against an existing sample store
    Predict(PredictArgs),
    /// Leave-one-out cross-validation on a training CSV
    Cv(CvArgs),
    /// Fit over a grid of log w values (solution path)
    Path(PathArgs),
    /// Draw coefficients from the marginal prior of one class coefficient
    PriorSample(PriorSampleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PriorArg {
    T,
    Ghs,
    Neg,
}

impl From<PriorArg> for PriorFamily {
    fn from(p: PriorArg) -> Self {
        match p {
            PriorArg::T => PriorFamily::T,
            PriorArg::Ghs => PriorFamily::Ghs,
            PriorArg::Neg => PriorFamily::Neg,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MixtureArg {
    T,
    Ghs,
    Neg,
    Laplace,
}

impl From<MixtureArg> for ScaleMixture {
    fn from(p: MixtureArg) -> Self {
        match p {
            MixtureArg::T => ScaleMixture::T,
            MixtureArg::Ghs => ScaleMixture::Ghs,
            MixtureArg::Neg => ScaleMixture::Neg,
            MixtureArg::Laplace => ScaleMixture::Laplace,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Mean,
    Median,
}

impl From<ModeArg> for SummaryMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Mean => SummaryMode::Mean,
            ModeArg::Median => SummaryMode::Median,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Design {
    /// Two classes, p features, two informative (default p = 200)
    A,
    /// Three classes, 10 structured features plus noise (default 1990 noise features)
    B,
}

#[derive(Debug, Args)]
pub struct PriorArgs {
    /// Prior family for the class coefficients
    #[arg(long, value_enum, default_value = "t")]
    pub prior: PriorArg,

    /// Degrees of freedom (alpha)
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,

    /// Log square-scale, log(w); fixed for the whole chain
    #[arg(long, default_value_t = -10.0, allow_negative_numbers = true, conflicts_with = "hyper_w_var")]
    pub log_w: f64,

    /// Sample log(w) with a N(0, VAR) hyperprior instead of fixing it; starts at log(w) = 0
    #[arg(long, value_name = "VAR")]
    pub hyper_w_var: Option<f64>,

    /// Prior variance of the intercepts (sigma_0^2)
    #[arg(long, default_value_t = DEFAULT_SIGMA0_SQ)]
    pub sigma0_sq: f64,
}

impl PriorArgs {
    pub fn spec(&self) -> PriorSpec {
        let base = PriorSpec::new(self.prior.into(), self.alpha, self.log_w)
            .with_sigma0_sq(self.sigma0_sq);
        match self.hyper_w_var {
            Some(var) => base.with_log_w(0.0).with_hyper_w(var),
            None => base,
        }
    }
}

#[derive(Debug, Args)]
pub struct ChainArgs {
    /// Iterations in the initial phase (n_1)
    #[arg(long, default_value_t = McmcSettings::default().n1)]
    pub n1: usize,

    /// Leapfrog steps per update in the initial phase (l_1)
    #[arg(long, default_value_t = McmcSettings::default().l1)]
    pub l1: usize,

    /// Iterations in the sampling phase (n_2)
    #[arg(long, default_value_t = McmcSettings::default().n2)]
    pub n2: usize,

    /// Leapfrog steps per update in the sampling phase (l_2)
    #[arg(long, default_value_t = McmcSettings::default().l2)]
    pub l2: usize,

    /// Stepsize adjustment factor (epsilon)
    #[arg(long, default_value_t = McmcSettings::default().eps)]
    pub eps: f64,

    /// Freeze features with sigma_j <= zeta during the HMC step (zeta)
    #[arg(long, default_value_t = McmcSettings::default().zeta)]
    pub zeta: f64,

    /// Keep every THIN-th sampling-phase draw [default: max(1, n2 / 10000)]
    #[arg(long)]
    pub thin: Option<usize>,

    /// Random seed
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

impl ChainArgs {
    pub fn settings(&self) -> McmcSettings {
        let s = McmcSettings::new(
            self.n1, self.l1, self.n2, self.l2, self.eps, self.zeta, self.seed,
        );
        match self.thin {
            Some(t) => s.with_thin(t),
            None => s,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "a")]
    pub design: Design,

    /// Training cases
    #[arg(long, default_value_t = 100)]
    pub n_train: usize,

    /// Test cases [default: 1000 for design a, 2000 for design b]
    #[arg(long)]
    pub n_test: Option<usize>,

    /// Number of features for design a
    #[arg(long, default_value_t = 200)]
    pub features: usize,

    /// Number of noise features for design b
    #[arg(long, default_value_t = 1990)]
    pub noise_features: usize,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Output directory for train.csv and test.csv
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub prior: PriorArgs,

    #[command(flatten)]
    pub chain: ChainArgs,

    /// Training CSV (label first, then features)
    #[arg(long)]
    pub train: PathBuf,

    /// Optional test CSV, scored after the chain finishes
    #[arg(long)]
    pub test: Option<PathBuf>,

    /// Output directory
    #[arg(long)]
    pub out: PathBuf,

    /// Posterior summary used for SDB
    #[arg(long, value_enum, default_value = "mean")]
    pub summary: ModeArg,

    /// Input CSVs have no header row
    #[arg(long)]
    pub no_header: bool,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    /// Sample store written by fit
    #[arg(long)]
    pub store: PathBuf,

    /// Select features with SDB at least this fraction of the largest SDB
    #[arg(long, default_value_t = 0.1)]
    pub threshold: f64,

    #[arg(long, value_enum, default_value = "mean")]
    pub summary: ModeArg,

    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub store: PathBuf,

    /// Test CSV on the raw scale; the store's training standardization is applied
    #[arg(long)]
    pub test: PathBuf,

    #[arg(long)]
    pub out: PathBuf,

    #[arg(long)]
    pub no_header: bool,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub prior: PriorArgs,

    #[command(flatten)]
    pub chain: ChainArgs,

    #[arg(long)]
    pub train: PathBuf,

    #[arg(long)]
    pub out: PathBuf,

    #[arg(long)]
    pub no_header: bool,
}

#[derive(Debug, Args)]
pub struct PathArgs {
    #[command(flatten)]
    pub prior: PriorArgs,

    #[command(flatten)]
    pub chain: ChainArgs,

    #[arg(long)]
    pub train: PathBuf,

    #[arg(long)]
    pub test: Option<PathBuf>,

    /// Smallest log(w) on the grid
    #[arg(long, default_value_t = -24.0, allow_negative_numbers = true)]
    pub grid_lo: f64,

    /// Largest log(w) on the grid
    #[arg(long, default_value_t = -8.0, allow_negative_numbers = true)]
    pub grid_hi: f64,

    /// Number of grid points
    #[arg(long, default_value_t = 100)]
    pub grid_n: usize,

    #[arg(long)]
    pub out: PathBuf,

    #[arg(long)]
    pub no_header: bool,
}

#[derive(Debug, Args)]
pub struct PriorSampleArgs {
    #[arg(long, value_enum, default_value = "t")]
    pub prior: MixtureArg,

    /// Degrees of freedom (alpha); ignored by laplace
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,

    /// Log square-scale, log(w); the prior scale is gamma = sqrt(w)
    #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
    pub log_w: f64,

    /// Number of draws
    #[arg(long, default_value_t = 4000)]
    pub count: usize,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    #[arg(long)]
    pub out: PathBuf,
}
