use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "cvqkd", version, about = "Key rates, thresholds, simulations and channel checks for CV-QKD")]
pub struct Cli {
    /// Worker threads for sweeps and simulations (0 = all cores).
    #[arg(long, global = true, env = "CVQKD_THREADS", default_value_t = 0)]
    pub threads: usize,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Logarithm base for rates and information: 2 (bits) or e (nats).
    #[arg(long = "log-base", global = true, default_value = "2", value_parser = ["2", "e"])]
    pub log_base: String,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Key rate at one (T, W) point.
    Rate(RateArgs),
    /// Tolerable excess noise N at one transmission.
    Threshold(ThresholdArgs),
    /// Threshold curve N(T) over a grid, annotated with crossovers against the counterpart protocol.
    Sweep(SweepArgs),
    /// Threshold curves for every protocol of one reconciliation direction.
    FigureBundle(BundleArgs),
    /// Monte-Carlo run of a prepare-and-measure protocol.
    Simulate(SimulateArgs),
    /// Channel tomography and the reducibility test.
    TomoCheck(TomoArgs),
}

/// Attack given by W or by the excess noise N.
#[derive(Debug, Args)]
#[command(group(ArgGroup::new("noise").required(true).args(["w", "n_excess"])))]
pub struct NoiseArgs {
    /// Channel transmission.
    #[arg(long = "T")]
    pub t: f64,

    /// Variance of Eve's thermal ancilla.
    #[arg(long = "W")]
    pub w: Option<f64>,

    /// Excess noise N = (1 - T)(W - 1)/T.
    #[arg(long = "N")]
    pub n_excess: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ProtocolArgs {
    /// hom, het, coll_hom, coll_het, hom2, het2, coll_hom2, coll_het2.
    #[arg(long)]
    pub protocol: String,

    /// dr or rr.
    #[arg(long)]
    pub recon: String,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    #[command(flatten)]
    pub protocol: ProtocolArgs,

    #[command(flatten)]
    pub noise: NoiseArgs,

    /// Modulation variance; selects the exact finite-V engine instead of the closed form.
    #[arg(long = "V")]
    pub v: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[command(flatten)]
    pub protocol: ProtocolArgs,

    /// Channel transmission.
    #[arg(long = "T")]
    pub t: f64,

    /// Modulation variance for the exact engine.
    #[arg(long = "V")]
    pub v: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub protocol: ProtocolArgs,

    /// Transmission grid lo:hi:steps.
    #[arg(long, default_value = "0.02:0.98:193")]
    pub grid: String,

    /// Modulation variance for the exact engine.
    #[arg(long = "V")]
    pub v: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BundleArgs {
    /// dr or rr.
    #[arg(long)]
    pub recon: String,

    /// Transmission grid lo:hi:steps.
    #[arg(long, default_value = "0.02:0.98:193")]
    pub grid: String,

    /// Modulation variance for the exact engine.
    #[arg(long = "V")]
    pub v: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// hom, het, hom2 or het2.
    #[arg(long)]
    pub protocol: String,

    #[command(flatten)]
    pub noise: NoiseArgs,

    /// Alice's modulation variance.
    #[arg(long = "V")]
    pub v: f64,

    /// Number of protocol runs.
    #[arg(long = "n")]
    pub n: usize,

    /// RNG seed; output is identical for any thread count.
    #[arg(long)]
    pub seed: u64,

    /// Also write the raw (X_A, X_B) samples as CSV.
    #[arg(long)]
    pub samples: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["forward", "correlation"])))]
#[command(group(ArgGroup::new("tolerance").args(["tol", "sigmas"])))]
pub struct TomoArgs {
    /// Forward-path dataset CSV (OFF configuration).
    #[arg(long, requires_all = ["backward", "round_trip"])]
    pub forward: Option<PathBuf>,

    /// Backward-path dataset CSV (OFF configuration).
    #[arg(long, requires = "forward")]
    pub backward: Option<PathBuf>,

    /// Round-trip dataset CSV (ON configuration, encoding off).
    #[arg(long = "round-trip", requires = "forward")]
    pub round_trip: Option<PathBuf>,

    /// Synthetic data: correlation c in [-1, 1] between the two ancillas.
    #[arg(long, allow_hyphen_values = true, requires_all = ["t", "seed"])]
    pub correlation: Option<f64>,

    /// Synthetic data: transmission of both paths.
    #[arg(long = "T")]
    pub t: Option<f64>,

    /// Synthetic data: variance of each ancilla.
    #[arg(long = "W", conflicts_with = "n_excess")]
    pub w: Option<f64>,

    /// Synthetic data: excess noise of each path.
    #[arg(long = "N")]
    pub n_excess: Option<f64>,

    /// Synthetic data: samples per probe.
    #[arg(long = "n", default_value_t = 10_000)]
    pub n: usize,

    /// Synthetic data: RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Synthetic data: write the three generated datasets into this directory.
    #[arg(long = "dump-dir", requires = "correlation")]
    pub dump_dir: Option<PathBuf>,

    /// Fixed tolerance on max-abs deviations.
    #[arg(long)]
    pub tol: Option<f64>,

    /// Tolerance in standard errors (default 5).
    #[arg(long)]
    pub sigmas: Option<f64>,
}
