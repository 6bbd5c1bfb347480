use std::path::PathBuf;

use robustbf::channel::ChannelError;
use robustbf::neighborhood::NeighborhoodError;
use robustbf::numerics::NumericsError;
use robustbf::optimizer::OptimizerError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("empty neighborhood: {0}")]
    EmptyNeighborhood(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{failed} of {total} verification checks failed")]
    VerificationFailed { failed: usize, total: usize },
}

impl HarnessError {
    /// Process exit status: 1 validation, 2 solver, 3 I/O, 4 empty
    /// neighborhood, 5 failed verification.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Validation(_) => 1,
            HarnessError::Solver(_) => 2,
            HarnessError::Io { .. } => 3,
            HarnessError::EmptyNeighborhood(_) => 4,
            HarnessError::VerificationFailed { .. } => 5,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }

    /// Short tag used in error-marker rows.
    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::Validation(_) => "validation",
            HarnessError::EmptyNeighborhood(_) => "empty_neighborhood",
            HarnessError::Solver(_) => "solver",
            HarnessError::Io { .. } => "io",
            HarnessError::VerificationFailed { .. } => "verification",
        }
    }
}

impl From<ChannelError> for HarnessError {
    fn from(e: ChannelError) -> Self {
        match e {
            ChannelError::Io(source) => HarnessError::Io {
                path: PathBuf::from("<stream>"),
                source,
            },
            other => HarnessError::Validation(other.to_string()),
        }
    }
}

impl From<NeighborhoodError> for HarnessError {
    fn from(e: NeighborhoodError) -> Self {
        match e {
            NeighborhoodError::EmptyMatch(_) => HarnessError::EmptyNeighborhood(e.to_string()),
            other => HarnessError::Validation(other.to_string()),
        }
    }
}

impl From<OptimizerError> for HarnessError {
    fn from(e: OptimizerError) -> Self {
        match e {
            OptimizerError::EmptyNeighborhood => HarnessError::EmptyNeighborhood(e.to_string()),
            OptimizerError::SubproblemFailed { .. }
            | OptimizerError::Aborted { .. }
            | OptimizerError::Numerics(NumericsError::NoConvergence { .. }) => {
                HarnessError::Solver(e.to_string())
            }
            other => HarnessError::Validation(other.to_string()),
        }
    }
}

impl From<NumericsError> for HarnessError {
    fn from(e: NumericsError) -> Self {
        match e {
            NumericsError::NoConvergence { .. } => HarnessError::Solver(e.to_string()),
            other => HarnessError::Validation(other.to_string()),
        }
    }
}
