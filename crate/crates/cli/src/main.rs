//! `netdim`: intrinsic dimension of weighted and unweighted networks.
//!
//! Data goes to files, the manifest to `<output>.manifest` (or `--manifest`),
//! and standard output gets a single summary line.

mod commands;
mod manifest;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Core(#[from] netdim_core::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) | CliError::Core(_) => 1,
        }
    }
}

/// Exit status for a successful sweep that found no plateau.
pub const NO_PLATEAU: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "netdim", version, about = "Intrinsic dimension of networks: twoNN plus Laplacian embedding")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Sample a point cloud (CSV).
    Gen(GenArgs),
    /// Union-rule k-nearest-neighbour graph of a point cloud.
    Knn(KnnArgs),
    /// Radius graph: edge when the distance is below --r.
    Geometric(GeometricArgs),
    /// Flip every node pair independently with probability --p.
    Perturb(PerturbArgs),
    /// Volume left by the cube-gap construction.
    Volume(VolumeArgs),
    /// Smallest Laplacian eigenvalues.
    Spectrum(SpectrumArgs),
    /// Spectral embedding (one CSV row per node).
    Embed(EmbedArgs),
    /// twoNN on a dissimilarity matrix or point cloud.
    EstimateWeighted(EstimateWeightedArgs),
    /// Embed-then-twoNN sweep over trial dimensions of an edge list.
    EstimateUnweighted(EstimateUnweightedArgs),
    /// Histogram of nearest-neighbour distances.
    NnHist(NnHistArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Dist {
    Cube,
    Gaussian,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum GraphKind {
    /// Edge list unless the file starts with a MatrixMarket banner or `n=`.
    Auto,
    Edges,
    /// Similarity (weight) matrix.
    Weights,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum DataKind {
    /// Dissimilarity matrix if the file starts with a MatrixMarket banner or
    /// `n=`, point cloud otherwise.
    Auto,
    Points,
    Dissimilarity,
    Similarity,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Convert {
    Reciprocal,
    OneMinus,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Auto,
    Dense,
    Lanczos,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Manifest path; defaults to `<output>.manifest`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SolverOpts {
    #[arg(long, value_enum, default_value = "auto")]
    pub solver: SolverArg,
    /// Seed of the Lanczos start vector.
    #[arg(long = "solver-seed", default_value_t = 0)]
    pub solver_seed: u64,
    /// Relative residual tolerance for Lanczos.
    #[arg(long = "solver-tol", default_value_t = 1e-11)]
    pub solver_tol: f64,
}

#[derive(Args, Debug, Clone)]
pub struct WindowOpts {
    /// Lower end of the twoNN averaging window, as a fraction of n.
    #[arg(long = "window-lo", default_value_t = 0.25)]
    pub window_lo: f64,
    #[arg(long = "window-hi", default_value_t = 0.75)]
    pub window_hi: f64,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub dist: Dist,
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct KnnArgs {
    /// Point cloud CSV.
    #[arg(long)]
    pub input: PathBuf,
    /// Neighbour count; defaults to floor(30 ln n).
    #[arg(long)]
    pub k: Option<usize>,
    /// Edge list.
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct GeometricArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub r: f64,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct PerturbArgs {
    /// Edge list.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct VolumeArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub r: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    pub kind: GraphKind,
    /// Number of eigenvalues; defaults to min(n, 30).
    #[arg(long)]
    pub m: Option<usize>,
    /// Keep only the largest connected component.
    #[arg(long = "giant-component")]
    pub giant_component: bool,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub solver: SolverOpts,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct EmbedArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    pub kind: GraphKind,
    /// Embedding dimension.
    #[arg(long)]
    pub k: usize,
    #[arg(long = "giant-component")]
    pub giant_component: bool,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub solver: SolverOpts,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct EstimateWeightedArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    pub kind: DataKind,
    /// Similarity to dissimilarity rule for `--kind similarity`.
    #[arg(long, value_enum, default_value = "reciprocal")]
    pub convert: Convert,
    /// d_curve CSV; the summary goes to `<output>.summary`.
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub window: WindowOpts,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct EstimateUnweightedArgs {
    /// Edge list.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long = "s-min", default_value_t = 2)]
    pub s_min: usize,
    #[arg(long = "s-max", default_value_t = 30)]
    pub s_max: usize,
    #[arg(long = "plateau-eps", default_value_t = 0.05)]
    pub plateau_eps: f64,
    #[arg(long = "plateau-len", default_value_t = 3)]
    pub plateau_len: usize,
    /// One eigendecomposition at s_max, sliced for smaller s.
    #[arg(long = "warm-start")]
    pub warm_start: bool,
    /// Evaluate every s instead of stopping at the first plateau.
    #[arg(long = "full-sweep")]
    pub full_sweep: bool,
    #[arg(long = "giant-component")]
    pub giant_component: bool,
    /// Per-s CSV (s, d_min, d_star, d_max, status).
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub window: WindowOpts,
    #[command(flatten)]
    pub solver: SolverOpts,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct NnHistArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    pub kind: DataKind,
    #[arg(long, value_enum, default_value = "reciprocal")]
    pub convert: Convert,
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    #[arg(long)]
    pub manifest: PathBuf,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("NETDIM_THREADS") else { return Ok(()) };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("NETDIM_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size thread pool: {e}")))
}

/// Parses `argv` and runs it; returns the process exit status.
pub fn dispatch<I, T>(argv: I) -> Result<u8, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cmd = Cli::command();
    let matches = match cmd.clone().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) if e.use_stderr() => return Err(CliError::Usage(e.render().to_string())),
        Err(e) => {
            // --help and --version.
            print!("{}", e.render());
            return Ok(0);
        }
    };
    let cli = Cli::from_arg_matches(&matches).map_err(|e| CliError::Usage(e.to_string()))?;
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    if let Cmd::Replay(args) = &cli.command {
        return commands::replay(&cmd, args);
    }
    let manifest = manifest::Manifest::from_matches(&cmd, name, sub);
    commands::run(cli.command, manifest)
}

fn main() -> ExitCode {
    let result = configure_threads().and_then(|()| dispatch(std::env::args_os()));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Usage(msg)) => {
            eprint!("{msg}");
            if !msg.ends_with('\n') {
                eprintln!();
            }
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
