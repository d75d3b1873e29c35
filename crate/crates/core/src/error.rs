use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph has no nodes")]
    EmptyGraph,

    #[error("graph has no edges")]
    NoEdges,

    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("samples have different lengths ({a} vs {b})")]
    LengthMismatch { a: usize, b: usize },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{0}: no valid contact records")]
    ZeroRecords(PathBuf),

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable machine-readable tag, used in CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyGraph => "empty_graph",
            Error::NoEdges => "no_edges",
            Error::NodeOutOfRange { .. } => "node_out_of_range",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::NonConvergence { .. } => "non_convergence",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::TooFewSamples { .. } => "too_few_samples",
            Error::Format { .. } => "format",
            Error::ZeroRecords(_) => "zero_records",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
        }
    }
}
