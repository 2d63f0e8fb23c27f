use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ogica::Algorithm;

/// Environment variable consulted for `--seed` when the flag is absent.
pub const SEED_ENV: &str = "OGICA_SEED";

#[derive(Debug, Parser)]
#[command(name = "ogica", version, about = "Orthogonal extended infomax ICA: simulate, decompose, benchmark")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate one synthetic mixture and write it as CSV plus a JSON manifest.
    Simulate(SimulateArgs),
    /// Center, whiten and unmix a CSV data matrix (channels as rows).
    Decompose(DecomposeArgs),
    /// Replicate the simulation study and write an aggregated JSON report.
    Benchmark(BenchmarkArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgorithmArg {
    Ogextinf,
    Extinf,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Algorithm {
        match a {
            AlgorithmArg::Ogextinf => Algorithm::OgExtInf,
            AlgorithmArg::Extinf => Algorithm::ExtInf,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Identity,
    Random,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Preset: 1 = 10+10 sources × 5000 samples, 2 = 25+25 sources × 10000 samples.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2), conflicts_with_all = ["n_super", "n_sub", "samples"])]
    pub experiment: Option<u8>,
    /// Number of Laplacian (super-Gaussian) sources.
    #[arg(long, requires_all = ["n_sub", "samples"])]
    pub n_super: Option<usize>,
    /// Number of uniform (sub-Gaussian) sources.
    #[arg(long, requires_all = ["n_super", "samples"])]
    pub n_sub: Option<usize>,
    #[arg(long, requires_all = ["n_super", "n_sub"])]
    pub samples: Option<usize>,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// Run index; selects an independent random stream under the same seed.
    #[arg(long, default_value_t = 0)]
    pub run: u64,
    #[arg(long, short = 'o')]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// CSV matrix, one row per channel.
    pub input: PathBuf,
    /// JSON result path.
    #[arg(long, short = 'o')]
    pub output: PathBuf,
    /// Optional CSV path for the estimated sources.
    #[arg(long)]
    pub sources: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "ogextinf")]
    pub algorithm: AlgorithmArg,
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 3000)]
    pub max_iterations: usize,
    /// Keep principal components explaining at least this fraction of variance; 0 keeps all.
    #[arg(long, default_value_t = 0.01)]
    pub pca_variance: f64,
    #[arg(long, default_value_t = ogica::nonlinearity::DEFAULT_SIGN_CUTOFF)]
    pub sign_cutoff: usize,
    /// Gradient step size (extinf only).
    #[arg(long, default_value_t = ogica::extinf::DEFAULT_LEARNING_RATE)]
    pub learning_rate: f64,
    #[arg(long, value_enum, default_value = "identity")]
    pub init: InitArg,
    /// Seed for `--init random`.
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// Reject input whose whitened covariance is not the identity.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub experiment: u8,
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "ogextinf,extinf")]
    pub algorithms: Vec<AlgorithmArg>,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, short = 'o')]
    pub output: PathBuf,
    /// Optional CSV of per-iteration weight changes for plotting.
    #[arg(long)]
    pub curves: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = ogica::extinf::DEFAULT_LEARNING_RATE)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = ogica::nonlinearity::DEFAULT_SIGN_CUTOFF)]
    pub sign_cutoff: usize,
}
