//! Experiment runner: identification, closed-loop runs, controller
//! comparison and Monte-Carlo forecast-uncertainty studies.

use std::path::Path;

pub mod experiment;
pub mod montecarlo;
pub mod output;
pub mod scenarios;

pub use experiment::{models_for, run_experiment, uncertainty, RunOptions, RunOutput, StepSummary};
pub use montecarlo::{monte_carlo, McSummary, Quartiles};
pub use output::{compare_reports, Comparison};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(hvac_mpc_core::Error),
    #[error("plant rejected a decision: {0}")]
    Plant(hvac_mpc_core::Error),
    #[error("controller failed at step {k}: {source}")]
    Solver {
        k: usize,
        #[source]
        source: hvac_mpc::MpcError,
    },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Mismatch(String),
}

impl HarnessError {
    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        Self::Io { path: path.display().to_string(), message: e.to_string() }
    }

    /// Process exit code: 2 for configuration problems, 3 for solver
    /// failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Mismatch(_) => 2,
            Self::Solver { .. } => 3,
            Self::Plant(_) | Self::Io { .. } => 1,
        }
    }
}
