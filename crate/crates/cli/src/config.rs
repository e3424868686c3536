use std::path::Path;

use ineqlab::inequalities::{CotypeVariant, LinearMode, SmoothnessKind};
use ineqlab::embeddings::GridEmbedding;
use ineqlab::schatten::TraceKind;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Where a grid function comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionSource {
    /// A seeded built-in family on the modulus implied by the experiment.
    Builtin(Family),
    /// A GridFunction table in JSON.
    Json(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "family", deny_unknown_fields)]
pub enum Family {
    /// Entries uniform in [−1, 1].
    Random { seed: u64 },
    /// Indicator of the origin.
    Indicator,
    /// cos(2π⟨x, y⟩/M).
    Character { y: Vec<i64> },
    /// cos(πx_1/half).
    Cosine { half: usize },
}

/// Where a list of matrices comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum MatrixSource {
    /// One CSV file per matrix, one row per line.
    Csv(Vec<String>),
    /// `count` seeded random matrices; PSD (GGᵀ/d) when `psd` is set, Gaussian otherwise.
    Random { count: usize, seed: u64, #[serde(default)] psd: bool },
    /// Diagonal matrices given by their diagonals.
    Diagonal(Vec<Vec<f64>>),
}

/// Coefficients of the linear functionals: scalars or vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficients {
    Scalars(Vec<f64>),
    Vectors(Vec<Vec<f64>>),
}

impl Coefficients {
    pub fn vectors(&self) -> Vec<Vec<f64>> {
        match self {
            Self::Scalars(a) => a.iter().map(|&x| vec![x]).collect(),
            Self::Vectors(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// One experiment. Every field but `experiment` is optional; each experiment reads the
/// fields it needs and reports a configuration error for missing ones.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// May be left out of a config file when the command line names the experiment.
    #[serde(default)]
    pub experiment: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    /// Box radius R.
    #[serde(default, skip_serializing_if = "Option::is_none", rename = "R")]
    pub radius: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    /// Multiplier K of the PSD counterexample.
    #[serde(default, skip_serializing_if = "Option::is_none", rename = "K")]
    pub big_k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    /// Overrides the torus modulus implied by the experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Coefficients>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<MatrixSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<LinearMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smoothness: Option<SmoothnessKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<CotypeVariant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<GridEmbedding>,
    /// Maximum number of evaluations; a float so that 1e6 is accepted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// Appends a CSV row of report scalars to this file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv_append: Option<String>,
}

pub const DEFAULT_BUDGET: u64 = 1_000_000;
pub const DEFAULT_SEED: u64 = 0;

impl ExperimentConfig {
    pub fn new(experiment: &str) -> Self {
        Self { experiment: experiment.to_string(), ..Self::default() }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization cannot fail")
    }

    pub fn budget(&self) -> Result<u64, CliError> {
        match self.budget {
            None => Ok(DEFAULT_BUDGET),
            Some(b) if b.is_finite() && b >= 1.0 && b <= u64::MAX as f64 => Ok(b.round() as u64),
            Some(b) => Err(CliError::Config(format!("budget {b} must be a finite number ≥ 1"))),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    /// Returns a copy with the named field replaced by a JSON value.
    pub fn with_field(&self, name: &str, value: serde_json::Value) -> Result<Self, CliError> {
        let mut v = serde_json::to_value(self).expect("config serialization cannot fail");
        v.as_object_mut().expect("config is an object").insert(name.to_string(), value);
        serde_json::from_value(v).map_err(|e| CliError::Config(format!("cannot set {name}: {e}")))
    }
}

pub(crate) fn require<T: Copy>(value: Option<T>, name: &str, experiment: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Config(format!("experiment {experiment} needs parameter {name}")))
}
