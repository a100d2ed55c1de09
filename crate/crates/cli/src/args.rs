use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "treewave",
    version,
    about = "Gaussian waves on the regular tree: sampling, level sets and percolation thresholds",
    allow_negative_numbers = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplerChoice {
    Dense,
    Recursive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodChoice {
    Direct,
    Smc,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Tree degree (at least 3).
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    /// Eigenvalue in [-2 sqrt(d-1), 2 sqrt(d-1)]; `edge` and `-edge` name the endpoints.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub lambda: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; standard output when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads; output does not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Covariance kernel phi(0..=n) and derived constants.
    Profile {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        n: usize,
    },
    /// Exact realizations on the ball of the given radius.
    SampleBall {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        radius: usize,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        #[arg(long, value_enum, default_value_t = SamplerChoice::Recursive)]
        sampler: SamplerChoice,
    },
    /// Exact realizations along a path of n vertices.
    SamplePath {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        reps: usize,
    },
    /// Checks the eigen-equation and sphere-sum identities on sampled balls.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        radius: usize,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        #[arg(long, value_enum, default_value_t = SamplerChoice::Recursive)]
        sampler: SamplerChoice,
    },
    /// Gibbs sampling of a path conditioned to stay above alpha.
    Gibbs {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long, default_value_t = 11_000)]
        sweeps: usize,
        #[arg(long, default_value_t = 1_000)]
        burnin: usize,
        #[arg(long, default_value_t = 10)]
        thin: usize,
        /// Independent chains, pooled in the summary.
        #[arg(long, default_value_t = 1)]
        chains: usize,
        /// One-based path position summarized in the tail table; defaults to the center.
        #[arg(long)]
        coord: Option<usize>,
    },
    /// Probability that a path of n vertices stays above alpha.
    Survival {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = MethodChoice::Smc)]
        method: MethodChoice,
        /// Draws for the direct method.
        #[arg(long, default_value_t = 100_000)]
        reps: usize,
        #[arg(long, default_value_t = 20_000)]
        particles: usize,
        /// Independent particle systems for the SMC method.
        #[arg(long, default_value_t = 8)]
        replicates: usize,
        /// First value of the path; with --x2, estimates survival given the starting pair.
        #[arg(long, requires = "x2")]
        x1: Option<f64>,
        #[arg(long, requires = "x1")]
        x2: Option<f64>,
        /// Comma-separated lengths; reports P(n+m) / (P(n) P(m)) over all pairs.
        #[arg(long, value_delimiter = ',', conflicts_with_all = ["x1", "x2"])]
        ratios: Option<Vec<usize>>,
    },
    /// Survival rate r(alpha) from the transfer operator on an alpha grid.
    Rate {
        #[command(flatten)]
        common: Common,
        /// Comma-separated thresholds; overrides the min/max/steps grid.
        #[arg(long, value_delimiter = ',')]
        alpha: Option<Vec<f64>>,
        #[arg(long, default_value_t = -1.0)]
        alpha_min: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha_max: f64,
        #[arg(long, default_value_t = 9)]
        steps: usize,
        #[arg(long, default_value_t = 64)]
        m: usize,
        #[arg(long, default_value_t = 8.0)]
        u_max_offset: f64,
    },
    /// Critical threshold alpha_c where r(alpha_c) = 1/(d-1).
    Threshold {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        #[arg(long, default_value_t = 64)]
        m: usize,
        #[arg(long, default_value_t = 8.0)]
        u_max_offset: f64,
    },
    /// Analytic threshold bounds, optionally checked against survival estimates.
    Bounds {
        #[command(flatten)]
        common: Common,
        /// Comma-separated thresholds at which to check the exponential bound.
        #[arg(long, value_delimiter = ',')]
        alpha: Option<Vec<f64>>,
        /// Longest path in the check.
        #[arg(long, default_value_t = 30)]
        n: usize,
        #[arg(long, default_value_t = 20_000)]
        particles: usize,
        #[arg(long, default_value_t = 8)]
        replicates: usize,
    },
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Profile { common, .. }
            | Command::SampleBall { common, .. }
            | Command::SamplePath { common, .. }
            | Command::Verify { common, .. }
            | Command::Gibbs { common, .. }
            | Command::Survival { common, .. }
            | Command::Rate { common, .. }
            | Command::Threshold { common, .. }
            | Command::Bounds { common, .. } => common,
        }
    }
}
