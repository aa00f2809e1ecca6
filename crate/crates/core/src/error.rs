use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },

    #[error("field is in {found} space, expected {expected} space")]
    WrongSpace {
        expected: &'static str,
        found: &'static str,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("frequency {requested} exceeds the resolvable limit {limit}")]
    AboveNyquist { requested: f64, limit: f64 },

    #[error("boundary contamination at t = {time}: |u| = {amplitude:e} in the outer strip")]
    BoundaryContamination { time: f64, amplitude: f64 },

    #[error("solver step rejected at t = {time}: {reason}")]
    StepRejected { time: f64, reason: String },

    #[error("picard iteration stopped contracting after {iteration} iterations (distance {distance:e}); reduce T_final")]
    NonContraction { iteration: usize, distance: f64 },

    #[error("missing snapshot: {0}")]
    MissingSnapshot(String),

    #[error("problem size {size} exceeds the direct-sum cap {cap}")]
    TooLarge { size: usize, cap: usize },

    #[error("ladder point {index}: {source}")]
    Ladder {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("malformed RPSF1 data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
