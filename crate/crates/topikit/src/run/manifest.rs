//! The `run.json` manifest: config, versions, and per-step input/output
//! records. Every artifact a subcommand writes is reachable from here.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::artifacts::{sha256_file, write_atomic};
use super::config::RunConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Hash of the exact config (including flag overrides) the step ran
    /// under; may differ from the manifest-level hash when later steps
    /// adjusted per-step options.
    pub config_sha256: String,
    pub inputs: Vec<FileRecord>,
    pub outputs: Vec<FileRecord>,
}

/// Serialized to `<out_dir>/run.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config_sha256: String,
    pub config: RunConfig,
    pub steps: BTreeMap<String, StepRecord>,
}

impl RunManifest {
    pub const FILE_NAME: &'static str = "run.json";

    fn fresh(config: &RunConfig) -> RunManifest {
        RunManifest {
            tool: "topikit".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_sha256: config.sha256(),
            config: config.clone(),
            steps: BTreeMap::new(),
        }
    }

    /// Loads the existing manifest, or starts a fresh one. Steps from
    /// earlier invocations are kept and merged; the manifest-level config
    /// reflects the most recent invocation.
    pub fn open(out_dir: &Path, config: &RunConfig) -> Result<RunManifest> {
        let path = out_dir.join(Self::FILE_NAME);
        if !path.exists() {
            return Ok(Self::fresh(config));
        }
        let contents = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let existing: RunManifest = serde_json::from_str(&contents).map_err(|e| Error::Parse {
            path: path.clone(),
            line: 0,
            message: e.to_string(),
        })?;
        Ok(RunManifest {
            config_sha256: config.sha256(),
            config: config.clone(),
            ..existing
        })
    }

    /// Records one step's inputs and outputs (checksummed) and persists the
    /// manifest atomically.
    pub fn record_step(
        &mut self,
        out_dir: &Path,
        step: &str,
        inputs: &[&Path],
        outputs: &[&Path],
    ) -> Result<()> {
        let rel = |p: &Path| -> String {
            p.strip_prefix(out_dir)
                .map(|r| r.to_string_lossy().into_owned())
                .unwrap_or_else(|_| p.to_string_lossy().into_owned())
        };
        let record = |paths: &[&Path]| -> Result<Vec<FileRecord>> {
            paths
                .iter()
                .map(|p| {
                    Ok(FileRecord {
                        path: rel(p),
                        sha256: sha256_file(p)?,
                    })
                })
                .collect()
        };
        let step_record = StepRecord {
            config_sha256: self.config_sha256.clone(),
            inputs: record(inputs)?,
            outputs: record(outputs)?,
        };
        self.steps.insert(step.to_string(), step_record);
        self.save(out_dir)
    }

    pub fn save(&self, out_dir: &Path) -> Result<()> {
        let path = out_dir.join(Self::FILE_NAME);
        let mut json = serde_json::to_string_pretty(self).expect("manifest serializes");
        json.push('\n');
        write_atomic(&path, json.as_bytes())
    }

    /// All output paths recorded across steps (relative to the out dir).
    pub fn all_outputs(&self) -> Vec<&str> {
        self.steps
            .values()
            .flat_map(|s| s.outputs.iter().map(|f| f.path.as_str()))
            .collect()
    }
}
