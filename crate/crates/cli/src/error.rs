use std::path::PathBuf;

use divmax_core::bounds::BoundError;
use divmax_core::exact::ExactError;
use divmax_core::{GraphError, LpError, SdpError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{source_name}:{line}: {message}")]
    Parse { source_name: String, line: usize, message: String },
    #[error("{source_name}:{line}: node '{id}' does not appear in the edge list")]
    UnknownNode { source_name: String, line: usize, id: String },
    #[error("{source_name}:{line}: exposure {value} is not -1 or +1")]
    NonBinaryExposure { source_name: String, line: usize, value: f64 },
    #[error("node '{0}' has no exposure value")]
    MissingExposure(String),
    #[error("invalid probabilities p_in={p_in}, p_out={p_out} (need 0 <= p_out <= p_in <= 1)")]
    InvalidProbability { p_in: f64, p_out: f64 },
    #[error("two-community generator needs an even node count, got {0}")]
    OddNodeCount(usize),
    #[error("subset-sum inputs must be positive integers")]
    NonPositiveInput,
    #[error("configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

impl HarnessError {
    /// Process exit code: 2 for malformed input, 3 for instances a method
    /// cannot handle, 4 for a timeout that still produced a result.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Parse { .. }
            | HarnessError::UnknownNode { .. }
            | HarnessError::NonBinaryExposure { .. }
            | HarnessError::MissingExposure(_)
            | HarnessError::Config(_)
            | HarnessError::Io { .. } => 2,
            HarnessError::Sdp(SdpError::ParseError { .. } | SdpError::DimensionMismatch { .. } | SdpError::Io(_)) => 2,
            HarnessError::Exact(ExactError::Timeout(_)) => 4,
            _ => 3,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

pub fn read_file(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
}

pub fn write_file(path: &std::path::Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
}
