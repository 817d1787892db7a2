use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::optimizer::RunConfig;
use crate::problems::ProblemSpec;

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Everything needed to reproduce one run. Artifact paths are relative to
/// the directory holding the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub label: String,
    pub problem: ProblemSpec,
    pub run: RunConfig,
    /// Seconds since the Unix epoch when the run started.
    pub started_at: u64,
    pub trace_path: PathBuf,
    pub plot_path: PathBuf,
    pub tool_version: String,
}

/// Hex SHA-256 prefix of the canonical JSON of `(problem, run)`.
pub fn run_id(problem: &ProblemSpec, run: &RunConfig) -> String {
    let canonical = serde_json::to_string(&(problem, run)).expect("configs serialize");
    let digest = Sha256::digest(canonical.as_bytes());
    hex::encode(&digest[..8])
}

impl RunManifest {
    pub fn new(problem: &ProblemSpec, run: &RunConfig) -> Self {
        let started_at = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        RunManifest {
            run_id: run_id(problem, run),
            label: run.label(),
            problem: problem.clone(),
            run: run.clone(),
            started_at,
            trace_path: PathBuf::from("trace.csv"),
            plot_path: PathBuf::from("plot.svg"),
            tool_version: TOOL_VERSION.to_string(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: RunManifest = serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
        let expected = run_id(&m.problem, &m.run);
        if m.run_id != expected {
            return Err(Error::format(
                path,
                format!("run id {} does not match its configuration ({expected})", m.run_id),
            ));
        }
        Ok(m)
    }

    /// Resolves an artifact path against the manifest's directory.
    pub fn resolve(manifest_path: &Path, artifact: &Path) -> PathBuf {
        match manifest_path.parent() {
            Some(dir) if artifact.is_relative() => dir.join(artifact),
            _ => artifact.to_path_buf(),
        }
    }
}
