use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "rhi-lab", version, about = "Exact maximal functions, weight constants and reverse Hölder checks")]
pub struct Cli {
    /// Write the result here (atomically) instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write a run manifest to this path.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    /// Worker threads; RHI_LAB_THREADS takes precedence.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Weight constants (A1, A1+, Ap, Fujii–Wilson, Khrushchev, Gurov–Reshetnyak).
    Constants(ConstantsArgs),
    /// Check one inequality on one weight.
    Verify(VerifyArgs),
    /// Check one inequality over a random corpus.
    Sweep(SweepArgs),
    /// Search for weights that nearly attain a sharp constant.
    Sharpness(SharpnessArgs),
    /// Build a μ-dyadic grid and dump its boxes.
    Grid(GridArgs),
    /// Maximal-function profile as CSV.
    Profile(ProfileArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Fw,
    Fwplus,
    A1,
    A1plus,
    Ap,
    Khrushchev,
    Gr,
}

#[derive(Args, Debug)]
pub struct ConstantsArgs {
    #[arg(long)]
    pub weight: PathBuf,
    #[arg(long, value_enum)]
    pub kind: Kind,
    /// Refinement depth for the grid lower bounds.
    #[arg(long, default_value_t = rhi_core::constants::DEFAULT_DEPTH)]
    pub depth: u32,
    /// Exponent for `--kind ap`.
    #[arg(long)]
    pub p: Option<f64>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub theorem: String,
    #[arg(long)]
    pub weight: PathBuf,
    /// Measure file for the μ-grid corollaries on dyadic weights.
    #[arg(long)]
    pub measure: Option<PathBuf>,
    #[arg(long)]
    pub r: Option<f64>,
    /// `a,b`
    #[arg(long)]
    pub interval: Option<String>,
    /// `a,b,c`
    #[arg(long)]
    pub triple: Option<String>,
    #[arg(long, default_value_t = rhi_core::constants::DEFAULT_DEPTH)]
    pub depth: u32,
    #[arg(long, default_value_t = 10)]
    pub max_depth: u32,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// δ for statements that take it as a hypothesis.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub lambda0: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Corpus {
    Random,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    pub theorem: String,
    #[arg(long, value_enum, default_value_t = Corpus::Random)]
    pub corpus: Corpus,
    /// Dimension of the dyadic corpus.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Cell depth of the dyadic corpus; refinement depth for step weights.
    #[arg(long, default_value_t = 3)]
    pub depth: u32,
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fixed exponent; by default the midpoint of each weight's admissible range.
    #[arg(long)]
    pub r: Option<f64>,
    /// Maximum number of pieces of the random step weights.
    #[arg(long, default_value_t = 8)]
    pub pieces: usize,
    #[arg(long, default_value_t = 16)]
    pub max_value: i64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct SharpnessArgs {
    #[arg(long)]
    pub variant: String,
    #[arg(long)]
    pub delta: f64,
    #[arg(long)]
    pub r: f64,
    #[arg(long, default_value_t = 1024)]
    pub pieces: usize,
    #[arg(long, default_value_t = 10_000)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct GridArgs {
    #[arg(long)]
    pub measure: PathBuf,
    /// Number of generations.
    #[arg(long)]
    pub depth: u32,
    /// Refuse to dump more boxes than this.
    #[arg(long, default_value_t = 1 << 20)]
    pub limit: usize,
}

#[derive(Args, Debug)]
pub struct ProfileArgs {
    #[arg(long)]
    pub weight: PathBuf,
    /// m, mplus or mminus
    #[arg(long, default_value = "m")]
    pub op: String,
    /// `a,b`; defaults to the support.
    #[arg(long)]
    pub interval: Option<String>,
    /// Interior samples per segment.
    #[arg(long, default_value_t = 8)]
    pub samples: usize,
}
