//! Experiment configuration and the reproducibility manifest.

use pce_core::{PceError, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Full configuration of one experiment run. Together with the code version
/// this determines every output byte.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: String,
    /// Polynomial degrees, or index-set levels for the diffusion study.
    pub degrees: Vec<usize>,
    /// Strategy names; empty means the experiment's default roster.
    #[serde(default)]
    pub strategies: Vec<String>,
    pub trials: usize,
    pub seed: u64,
    pub candidates: usize,
    pub test_samples: usize,
    /// Monte-Carlo sample count for orthogonalization rules where used.
    #[serde(default = "default_gs_samples")]
    pub gs_samples: usize,
    /// Model dimension override for experiments that support it.
    #[serde(default)]
    pub dimension: Option<usize>,
    /// Record wall-clock times. Off by default so re-runs are byte-identical.
    #[serde(default)]
    pub timing: bool,
}

fn default_gs_samples() -> usize {
    10_000
}

impl ExperimentConfig {
    pub fn defaults(experiment: &str) -> Self {
        ExperimentConfig {
            experiment: experiment.to_string(),
            degrees: default_degrees(experiment),
            strategies: Vec::new(),
            trials: 10,
            seed: 7,
            candidates: 10_000,
            test_samples: 10_000,
            gs_samples: default_gs_samples(),
            dimension: None,
            timing: false,
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PceError::InvalidArgument(format!("cannot read {path:?}: {e}")))?;
        serde_json::from_str(&text)
            .map_err(|e| PceError::InvalidArgument(format!("bad config {path:?}: {e}")))
    }
}

pub fn default_degrees(experiment: &str) -> Vec<usize> {
    match experiment {
        "genz1d-basis" => (1..=20).collect(),
        "cr-study" => (1..=10).collect(),
        "genz2d" | "mean2d" | "mc-moments" => (1..=15).collect(),
        "genz10d" | "mean10d" => (1..=3).collect(),
        "banana" => (1..=8).collect(),
        "zonotope" => (1..=10).collect(),
        "diffusion" => (0..=8).collect(),
        _ => (1..=10).collect(),
    }
}

/// Wrapper written next to the results so a run can be reproduced exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    pub code_version: String,
}

impl Manifest {
    pub fn new(config: ExperimentConfig) -> Self {
        Manifest {
            config,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| PceError::Numeric(format!("manifest serialization: {e}")))?;
        std::fs::write(path, text)
            .map_err(|e| PceError::InvalidArgument(format!("cannot write {path:?}: {e}")))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PceError::InvalidArgument(format!("cannot read {path:?}: {e}")))?;
        serde_json::from_str(&text)
            .map_err(|e| PceError::InvalidArgument(format!("bad manifest {path:?}: {e}")))
    }
}

/// Output paths of a run inside its target directory.
pub struct OutputPaths {
    pub results_csv: PathBuf,
    pub manifest_json: PathBuf,
}

impl OutputPaths {
    pub fn in_dir(dir: &Path) -> Self {
        OutputPaths {
            results_csv: dir.join("results.csv"),
            manifest_json: dir.join("manifest.json"),
        }
    }
}
