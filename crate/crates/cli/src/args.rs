use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "fj",
    version,
    about = "Driven non-Hermitian spin-orbit-coupled double well"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the driven equations and write the trajectory.
    Evolve(EvolveArgs),
    /// Effective couplings, closed-form quasienergies and stability verdict.
    Quasienergy(QuasienergyArgs),
    /// Stability map over two parameters.
    Scan(ScanArgs),
    /// Balanced gain-loss boundary along one swept parameter.
    Boundary(BoundaryArgs),
    /// Run the reference checkpoint suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// Bare tunneling rate.
    #[arg(long)]
    pub nu: Option<f64>,
    /// Driving frequency.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Zeeman field.
    #[arg(long = "Omega")]
    pub zeeman: Option<f64>,
    /// Spin-orbit coupling strength.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Driving amplitude.
    #[arg(long, conflicts_with = "two_eps_over_omega")]
    pub eps: Option<f64>,
    /// Driving amplitude as the Bessel argument 2 eps / omega.
    #[arg(long)]
    pub two_eps_over_omega: Option<f64>,
    /// Balanced gain and loss.
    #[arg(long, conflicts_with_all = ["beta_l", "beta_r"])]
    pub beta: Option<f64>,
    /// Gain in the left well (needs --beta-r).
    #[arg(long)]
    pub beta_l: Option<f64>,
    /// Loss in the right well (needs --beta-l).
    #[arg(long)]
    pub beta_r: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Print the resolved configuration as JSON and exit.
    #[arg(long)]
    pub dump_config: bool,
    /// Output file (stdout when absent).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Initially occupied basis state: 1 |0,up>, 2 |down,0>, 3 |up,0>, 4 |0,down>.
    #[arg(long, conflicts_with = "init_amps", value_parser = clap::value_parser!(u8).range(1..=4))]
    pub init: Option<u8>,
    /// Initial amplitudes as eight comma-separated numbers re1,im1,...,re4,im4.
    #[arg(long, allow_hyphen_values = true)]
    pub init_amps: Option<String>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub steps_per_period: Option<usize>,
    #[arg(long)]
    pub sample_stride: Option<usize>,
    /// Also write the effective-model trajectory on the same time grid.
    #[arg(long)]
    pub analytic: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct QuasienergyArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Tolerance on Im E for the stability verdict.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Tolerance of the unbalanced equilibrium relations.
    #[arg(long)]
    pub equilibrium_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// First axis as name:min:max:count.
    #[arg(long)]
    pub axis1: Option<String>,
    /// Second axis as name:min:max:count.
    #[arg(long)]
    pub axis2: Option<String>,
    /// re_rho_even, re_rho_sum_odd or max_im_spectrum.
    #[arg(long)]
    pub quantity: Option<String>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Cross-check this many random cells by integration.
    #[arg(long)]
    pub verify_dynamics: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (falls back to FJ_THREADS, then all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct BoundaryArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Swept parameter as name:min:max:count (lambda or two_eps_over_omega).
    #[arg(long)]
    pub axis: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Checkpoint suite name (only `figures`).
    #[arg(long)]
    pub suite: Option<String>,
    /// Directory receiving trajectory CSVs and scan JSONs of the suite.
    #[arg(long)]
    pub artifacts: Option<PathBuf>,
}
