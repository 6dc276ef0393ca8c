//! The `fsn` command surface: configuration files, run manifests and the
//! subcommands behind the binary.

mod commands;
mod config;
mod manifest;

pub use commands::{run, write_atomic, Cli, Command};
pub use config::{
    CreepSection, EmbeddingSection, FlowSection, IngestSection, LatticeSection, OutputSection, RunConfig,
    SolverSection, SweepSection, YieldSection,
};
pub use manifest::{file_digest, InputDigest, RunManifest, StageStatus};

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Solver(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Process exit status: 2 for I/O, 3 for validation, 4 for solver failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 2,
            CliError::Validation(_) => 3,
            CliError::Solver(_) => 4,
        }
    }
}
