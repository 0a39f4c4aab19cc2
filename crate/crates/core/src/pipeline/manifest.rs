use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::Config;
use crate::error::Result;
use crate::io::{file_sha256, read_json, write_json};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactRecord {
    /// Relative to the run directory.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub artifacts: Vec<ArtifactRecord>,
    pub finished_at: u64,
    pub provider_calls: usize,
}

/// Everything needed to replay a run: the configuration snapshot plus the
/// hash of every artifact each stage wrote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config: Config,
    pub seed: u64,
    pub provider: String,
    pub model: String,
    pub created_at: u64,
    pub stages: BTreeMap<String, StageRecord>,
}

pub(crate) fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl RunManifest {
    pub fn new(config: &Config, provider: &str) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            seed: config.seed,
            provider: provider.to_string(),
            model: config.model.clone(),
            created_at: unix_now(),
            stages: BTreeMap::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        read_json(path)
    }

    pub fn save(&self, run_dir: &Path) -> Result<()> {
        write_json(&run_dir.join(MANIFEST_FILE), self)
    }

    pub fn record(&mut self, run_dir: &Path, stage: &str, files: &[&str], provider_calls: usize) -> Result<()> {
        let artifacts = files
            .iter()
            .map(|f| {
                Ok(ArtifactRecord {
                    path: f.to_string(),
                    sha256: file_sha256(&run_dir.join(f))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        self.stages.insert(
            stage.to_string(),
            StageRecord {
                artifacts,
                finished_at: unix_now(),
                provider_calls,
            },
        );
        Ok(())
    }
}
