//! File formats and the experiment harness behind the `dro-path` binary.

pub mod example;
pub mod harness;
pub mod io;

use std::path::Path;

use dro_path_core::ambiguity::AmbiguityError;
use dro_path_core::baselines::BaselineError;
use dro_path_core::datagen::DatagenError;
use dro_path_core::graph::GraphError;
use dro_path_core::solver::SolverError;

/// Exit status for invalid configuration or input.
pub const EXIT_INVALID: i32 = 2;
/// Exit status when any instance-level solve failed.
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Ambiguity(#[from] AmbiguityError),
    #[error(transparent)]
    Datagen(#[from] DatagenError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io { .. } | Self::Csv(_) => 1,
            Self::Solver(SolverError::Graph(_) | SolverError::Ambiguity(_) | SolverError::Coverage { .. }) => {
                EXIT_INVALID
            }
            Self::Solver(_) => EXIT_SOLVER,
            Self::Baseline(BaselineError::UnresolvableSample { .. } | BaselineError::NoSamples(_)) => EXIT_SOLVER,
            _ => EXIT_INVALID,
        }
    }
}
