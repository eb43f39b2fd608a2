//! Run manifests: every command that produces artifacts writes one, linking
//! inputs (dataset checksums, seed, resolved config) to outputs (artifact
//! paths and the checkpoint content hash).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// argv as invoked, replayable verbatim.
    pub command_line: Vec<String>,
    pub resolved_config: BTreeMap<String, String>,
    /// Split file name -> sha256.
    pub dataset_checksums: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub workers: usize,
    pub started_at: String,
    pub finished_at: String,
    /// Artifact name -> path.
    pub artifacts: BTreeMap<String, String>,
    /// Content hash of the checkpoint this run produced or consumed.
    pub checkpoint_hash: Option<String>,
}

impl RunManifest {
    pub fn begin(command: &str, workers: usize) -> Self {
        Self {
            command: command.to_owned(),
            command_line: std::env::args().collect(),
            resolved_config: BTreeMap::new(),
            dataset_checksums: BTreeMap::new(),
            seed: None,
            workers,
            started_at: now(),
            finished_at: String::new(),
            artifacts: BTreeMap::new(),
            checkpoint_hash: None,
        }
    }

    pub fn record_dataset(&mut self, dir: &Path) -> Result<()> {
        for name in ["train.txt", "valid.txt", "dev.txt", "test.txt"] {
            let path = dir.join(name);
            if path.is_file() {
                let hash = transa::checkpoint::file_hash(&path)
                    .with_context(|| format!("hashing {}", path.display()))?;
                self.dataset_checksums.insert(name.to_owned(), hash);
            }
        }
        Ok(())
    }

    pub fn add_artifact(&mut self, name: &str, path: &Path) {
        self.artifacts
            .insert(name.to_owned(), path.display().to_string());
    }

    /// Stamps the end time and writes `<command>-manifest.json` in `dir`.
    pub fn finish(mut self, dir: &Path) -> Result<PathBuf> {
        self.finished_at = now();
        let path = dir.join(format!("{}-manifest.json", self.command));
        let json = serde_json::to_string_pretty(&self)?;
        fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}
