use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use masdag::datagen::{GraphModel, NoiseFamily, ScaleMode, SfDirection};
use masdag::solver::Method;

#[derive(Debug, Parser)]
#[command(
    name = "masdag",
    version,
    about = "Learn large DAGs from linear SEM data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic benchmark instance.
    Gen(GenArgs),
    /// Learn a DAG from a generated (or user-provided) dataset.
    Fit(FitArgs),
    /// Score a weight matrix against a ground truth.
    Eval(EvalArgs),
    /// Run gen, fit and eval over a parameter grid.
    Bench(BenchArgs),
    /// Project a weight matrix onto an acyclic subgraph.
    Mas(MasArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelArg {
    Er,
    Sf,
}

impl From<ModelArg> for GraphModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Er => GraphModel::ErdosRenyi,
            ModelArg::Sf => GraphModel::ScaleFree,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseArg {
    Gaussian,
    Exponential,
    Gumbel,
}

impl From<NoiseArg> for NoiseFamily {
    fn from(n: NoiseArg) -> Self {
        match n {
            NoiseArg::Gaussian => NoiseFamily::Gaussian,
            NoiseArg::Exponential => NoiseFamily::Exponential,
            NoiseArg::Gumbel => NoiseFamily::Gumbel,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleArg {
    Ev,
    Nv,
}

impl From<ScaleArg> for ScaleMode {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::Ev => ScaleMode::Equal,
            ScaleArg::Nv => ScaleMode::NonEqual,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SfDirectionArg {
    /// Existing node -> new node.
    #[default]
    Downstream,
    /// New node -> existing node.
    Upstream,
}

impl From<SfDirectionArg> for SfDirection {
    fn from(s: SfDirectionArg) -> Self {
        match s {
            SfDirectionArg::Downstream => SfDirection::Downstream,
            SfDirectionArg::Upstream => SfDirection::Upstream,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Proximas,
    Optimas,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Proximas => Method::ProxiMas,
            MethodArg::Optimas => Method::OptiMas,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GenArgs {
    /// Number of nodes.
    #[arg(long)]
    pub d: usize,
    /// Expected arcs per node.
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long, value_enum)]
    pub noise: NoiseArg,
    #[arg(long, value_enum)]
    pub scale: ScaleArg,
    /// Training samples.
    #[arg(long)]
    pub n: usize,
    /// Validation samples (defaults to --n).
    #[arg(long)]
    pub n_val: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SfDirectionArg::Downstream)]
    pub sf_direction: SfDirectionArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FitArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Proximas)]
    pub method: MethodArg,
    #[arg(long, default_value_t = 0.1)]
    pub lambda1: f64,
    #[arg(long, default_value_t = 20.0)]
    pub lambda2: f64,
    /// Maximum number of outer iterations.
    #[arg(long, default_value_t = 5000)]
    pub iters: usize,
    /// Wall-clock budget in seconds.
    #[arg(long)]
    pub time_budget: Option<f64>,
    /// Fraction of the budget run before acyclicity is enforced.
    #[arg(long, default_value_t = 0.8)]
    pub warmstart_frac: f64,
    /// Adam learning rate (optimas only).
    #[arg(long, default_value_t = 0.001)]
    pub lr: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Snapshot every M iterations (0: final iteration only).
    #[arg(long, default_value_t = 0)]
    pub snapshot_every: usize,
    /// Directory holding X_train.csv.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub weights: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    /// Validation samples (also fixes the node count).
    #[arg(long)]
    pub val: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated ascending thresholds; defaults to the standard grid.
    #[arg(long, value_delimiter = ',')]
    pub thresholds: Option<Vec<f64>>,
    /// Fit manifest to copy objective and timing from (defaults to
    /// manifest.json next to the weights file, when present).
    #[arg(long)]
    pub fit_manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct BenchArgs {
    /// key=value grid specification.
    #[arg(long)]
    pub grid: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Grid cells run concurrently.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct MasArgs {
    /// Weight matrix in triplet format.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Node count (defaults to the largest index + 1).
    #[arg(long)]
    pub d: Option<usize>,
    /// Use the exhaustive search (d <= 9).
    #[arg(long)]
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}
