use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("width mismatch: expected {expected} bits, got {actual}")]
    WidthMismatch { expected: u32, actual: u32 },

    #[error("value {value:#x} does not fit in {width} bits")]
    ValueOutOfRange { width: u32, value: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("graph construction failed after {attempts} attempt(s); worst extractor violation {worst_violation}")]
    ConstructionFailed {
        attempts: u32,
        worst_violation: String,
    },

    #[error("audit scope too large: {0}")]
    AuditInfeasible(String),

    #[error("rate vector violates the rate region for subsets {0:?}")]
    RateRegionViolated(Vec<String>),

    #[error("malformed coding table: {0}")]
    MalformedTable(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },

    #[error("usage error: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<String>, err: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }
}
