use thiserror::Error;

/// Errors raised by the numerical core. Shape and precondition problems are
/// separated so the CLI can map them onto exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("matrix dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("axis not found: {0}")]
    AxisNotFound(String),
    #[error("degree error: {0}")]
    Degree(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("spectral gap below threshold after {0} retries")]
    GapFailure(u32),
    #[error("transport drift {0:.3e} exceeds the limit")]
    Drift(f64),
    #[error("exactness test refused: {0}")]
    NotTorus(String),
    #[error("two routes disagree: {0}")]
    RouteMismatch(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
