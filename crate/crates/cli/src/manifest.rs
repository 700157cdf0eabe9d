//! JSON run records written next to every output.

use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::args::{GenArgs, ModelArg, NoiseArg, ScaleArg, SfDirectionArg};
use crate::error::{CliError, Result};

pub const TOOL: &str = "masdag";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const DATA_META: &str = "meta.json";
pub const FIT_MANIFEST: &str = "manifest.json";
pub const EVAL_MANIFEST: &str = "eval_manifest.json";
pub const MAS_MANIFEST: &str = "mas_manifest.json";
pub const BENCH_MANIFEST: &str = "bench_manifest.json";

/// Metadata of a generated dataset. Contains no timestamps so that
/// regenerating with the same arguments is byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataMeta {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub args: GenArgs,
    pub d: usize,
    pub k: usize,
    pub model: ModelArg,
    pub noise: NoiseArg,
    pub scale: ScaleArg,
    pub sf_direction: SfDirectionArg,
    pub n_train: usize,
    pub n_val: usize,
    pub seed: u64,
    pub validation_seed: u64,
    pub noise_scales: Vec<f64>,
    pub true_arcs: usize,
    pub outputs: Vec<String>,
}

/// Record of a fit, eval, mas or bench run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// The arguments of the run; enough to replay it.
    pub args: serde_json::Value,
    /// Metadata of the input dataset, when known.
    #[serde(default)]
    pub data: Option<DataMeta>,
    pub started_unix_s: f64,
    pub finished_unix_s: f64,
    pub outputs: Vec<String>,
    #[serde(default)]
    pub results: serde_json::Value,
}

impl RunManifest {
    pub fn new<A: Serialize>(command: &str, args: &A, started_unix_s: f64) -> Result<Self> {
        Ok(Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            args: serde_json::to_value(args)?,
            data: None,
            started_unix_s,
            finished_unix_s: started_unix_s,
            outputs: Vec::new(),
            results: serde_json::Value::Null,
        })
    }
}

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}
