use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageStatus {
    pub stage: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// Provenance record written once per run.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub config_hash: String,
    pub inputs: Vec<InputDigest>,
    pub wall_clock_seconds: f64,
    pub stages: Vec<StageStatus>,
    #[serde(skip)]
    started: Option<Instant>,
}

pub fn file_digest(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl RunManifest {
    pub fn start(command: &str, config_hash: String) -> Self {
        Self {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash,
            inputs: Vec::new(),
            wall_clock_seconds: 0.0,
            stages: Vec::new(),
            started: Some(Instant::now()),
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<(), CliError> {
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: file_digest(path)?,
        });
        Ok(())
    }

    pub fn stage(&mut self, stage: &str, status: &str, detail: Option<String>) {
        self.stages.push(StageStatus {
            stage: stage.to_string(),
            status: status.to_string(),
            detail,
        });
    }

    pub fn finish(mut self) -> Self {
        if let Some(t) = self.started.take() {
            self.wall_clock_seconds = t.elapsed().as_secs_f64();
        }
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }
}
