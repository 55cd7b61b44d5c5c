use thiserror::Error;

/// Error type shared across the crate.
///
/// Cloneable so cached factorization failures can be handed out more
/// than once.
#[derive(Debug, Clone, Error)]
pub enum CoreError {
    #[error("matrix is not positive definite (pivot {pivot:e} at column {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{op} failed to converge within {iterations} iterations")]
    NonConvergence { op: &'static str, iterations: usize },

    #[error("dual multipliers diverged; the cut system may be infeasible")]
    EmptyPolyhedronSuspected,

    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("unsupported instance schema version {found:?} (expected {expected:?})")]
    SchemaVersionMismatch { found: String, expected: &'static str },

    #[error("malformed instance file: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CoreError {
    fn from(e: std::io::Error) -> Self {
        CoreError::Io(e.to_string())
    }
}
