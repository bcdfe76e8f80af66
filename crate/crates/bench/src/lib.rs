//! Experiment driver: runs, sweeps, result tables and field renders.

pub mod config;
pub mod experiment;
pub mod plot;
pub mod render;
pub mod report;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{ConfigFile, ExperimentConfig, ModelKind, Preset, SweepFile};
pub use experiment::{output_root, run_experiment, sweep, ReportBundle, SweepReport, OUTPUT_ROOT_ENV};
pub use render::{render_checkpoint, render_fields, RenderOptions};
pub use report::ResultRow;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("config error: {0}")]
    Config(String),
    #[error("missing reference data: {0}")]
    MissingReference(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Train(#[from] qcpinn::train::TrainError),
}

impl BenchError {
    /// Process exit status: 2 config, 4 missing reference, 1 otherwise.
    /// Aborted runs are reported through [`ReportBundle::aborted`].
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) => 2,
            BenchError::MissingReference(_) => 4,
            BenchError::Io(_) | BenchError::Train(_) => 1,
        }
    }

    pub(crate) fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        BenchError::Io(format!("{}: {e}", path.display()))
    }
}

/// Exit status for runs that trained but stopped on a numerical failure.
pub const EXIT_ABORTED: i32 = 3;

pub(crate) fn create_dir(dir: &PathBuf) -> Result<(), BenchError> {
    std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))
}
