use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use cvft_core::figures::{Figure, SWEEP_DOCS};
use cvft_core::gkp::{Convention, NoiseKind};
use cvft_core::mc::SamplingMode;

#[derive(Debug, Parser)]
#[command(name = "cvft", version, about = "Cluster-state, GKP and repetition-code threshold analysis")]
pub struct Cli {
    /// `key = value` file with defaults; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Write CSV here (atomically) instead of standard output.
    #[arg(long, short, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    /// Variance convention for GKP shift noise [default: half-vacuum].
    #[arg(long, global = true, value_enum)]
    pub convention: Option<ConventionArg>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Nullifier variances against the inseparability bound.
    Fig3(GridArgs),
    /// Squeezing left in the cluster and after one two-mode gate.
    Fig5c(GridArgs),
    /// Square-lattice GKP error probability, gate-noise model.
    Fig6c(GridArgs),
    /// Logical error per repetition number, gate-noise model.
    Fig7a(GridArgs),
    /// Logical error per repetition number, resource-only model.
    Fig7b(GridArgs),
    /// n = 101 under both models next to the single-qubit error.
    Fig7c(GridArgs),
    /// Squeezing where n = 101 starts beating the bare square-lattice qubit.
    Threshold(ThresholdArgs),
    /// Full-inseparability check of the built lattice.
    Vlf(VlfArgs),
    /// Monte Carlo estimate of the logical error probability.
    Mc(McArgs),
    /// Logical error over a custom grid, model and repetition list.
    Sweep(SweepArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Fig3(_) => "fig3",
            Command::Fig5c(_) => "fig5c",
            Command::Fig6c(_) => "fig6c",
            Command::Fig7a(_) => "fig7a",
            Command::Fig7b(_) => "fig7b",
            Command::Fig7c(_) => "fig7c",
            Command::Threshold(_) => "threshold",
            Command::Vlf(_) => "vlf",
            Command::Mc(_) => "mc",
            Command::Sweep(_) => "sweep",
        }
    }
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Squeezing grid `start:stop:step` in dB [default: 2:20:0.1].
    #[arg(long, value_name = "GRID")]
    pub squeezing_db: Option<String>,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
}

#[derive(Debug, Args)]
pub struct VlfArgs {
    /// Resource squeezing in dB.
    #[arg(long, value_name = "DB")]
    pub squeezing_db: Option<String>,
    /// List the best witness for every bipartition of the unit cell.
    #[arg(long)]
    pub bipartitions: bool,
}

#[derive(Debug, Args)]
pub struct McArgs {
    /// Repetition number (odd) [default: 1].
    #[arg(long)]
    pub n: Option<String>,
    /// GKP aspect ratio, or `auto` for the optimized value [default: auto].
    #[arg(long, value_name = "R|auto")]
    pub aspect_ratio: Option<String>,
    /// Resource squeezing in dB [default: 15].
    #[arg(long, value_name = "DB")]
    pub squeezing_db: Option<String>,
    /// Number of trials [default: 1000000].
    #[arg(long)]
    pub trials: Option<String>,
    /// RNG seed [default: 1].
    #[arg(long)]
    pub seed: Option<String>,
    /// Sampling mode [default: independent].
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Shift-noise model [default: gate-noise].
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Squeezing grid `start:stop:step` in dB [default: 2:20:0.1].
    #[arg(long, value_name = "GRID")]
    pub squeezing_db: Option<String>,
    /// Shift-noise model [default: gate-noise].
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    /// Comma-separated odd repetition numbers [default: 1,3,5,11,25,51,101].
    #[arg(long, value_name = "LIST")]
    pub n: Option<String>,
    /// GKP aspect ratio, or `auto` [default: auto].
    #[arg(long, value_name = "R|auto")]
    pub aspect_ratio: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    GateNoise,
    ResourceOnly,
}

impl From<ModelArg> for NoiseKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::GateNoise => NoiseKind::GateNoise,
            ModelArg::ResourceOnly => NoiseKind::ResourceOnly,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    HalfVacuum,
    Literal,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::HalfVacuum => Convention::HalfVacuum,
            ConventionArg::Literal => Convention::Literal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Independent,
    Joint,
}

impl From<ModeArg> for SamplingMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Independent => SamplingMode::IndependentMarginals,
            ModeArg::Joint => SamplingMode::JointPhysical,
        }
    }
}

const THRESHOLD_DOCS: &str = "model          noise model\n\
     convention     variance convention\n\
     threshold_db   crossing of Pe(n=1, R=1) and Pe(n=101, R*), two decimals\n\
     crossings      sign changes on the 0.1 dB scan (1 for a clean crossing)";

const VLF_DOCS: &str = "Default table, one row per interior time bin:\n\
     squeezing_db   resource squeezing (dB)\n\
     bin            time bin\n\
     var_x, var_p   normalized x1/p1 nullifier variances\n\
     bound          1/(4*sqrt 2)\n\
     margin         bound minus the larger variance\n\
     pass           1 if both variances are below the bound\n\n\
     With --bipartitions, one row per split of the six-mode unit:\n\
     s1, s2         mode indices on each side (space separated)\n\
     u, v           nullifier pair giving the best witness\n\
     lhs            Var(u) + Var(v)\n\
     rhs            separability bound for the split\n\
     margin         rhs - lhs\n\
     inseparable    1 if lhs < rhs";

const MC_DOCS: &str = "n, aspect_ratio, squeezing_db, model, mode, trials, seed   run parameters\n\
     failures       logical failures observed\n\
     pe             failures / trials\n\
     std_error      binomial standard error of pe\n\
     analytic_pe    product-form logical error probability\n\
     deviation_se   |pe - analytic_pe| in standard errors at analytic_pe";

const CONFIG_DOCS: &str = "Config keys: squeezing_db, model, convention, n, aspect_ratio, trials, seed, mode, \
     bipartitions, output, format (csv only).";

/// Clap command with the CSV column reference attached to every subcommand.
pub fn command() -> clap::Command {
    let mut cmd = Cli::command().after_help(CONFIG_DOCS);
    for fig in Figure::ALL {
        cmd = cmd.mut_subcommand(fig.id(), |c| c.after_help(format!("CSV columns:\n{}", fig.column_docs())));
    }
    cmd.mut_subcommand("threshold", |c| c.after_help(format!("CSV columns:\n{THRESHOLD_DOCS}")))
        .mut_subcommand("vlf", |c| c.after_help(format!("CSV columns:\n{VLF_DOCS}")))
        .mut_subcommand("mc", |c| c.after_help(format!("CSV columns:\n{MC_DOCS}")))
        .mut_subcommand("sweep", |c| c.after_help(format!("CSV columns:\n{SWEEP_DOCS}")))
}
