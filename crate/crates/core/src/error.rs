use thiserror::Error;

/// Errors raised anywhere in the toolkit.
///
/// Variants are grouped so that the command-line front end can map them
/// onto its exit-code taxonomy via [`Error::category`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("term on bond {bond} is not diagonal (off-diagonal magnitude {magnitude:.3e})")]
    NotDiagonal { bond: usize, magnitude: f64 },

    #[error("chain folding needs an even length, got N = {0}")]
    OddLength(usize),

    #[error("chain folding needs periodic boundary conditions")]
    NotPeriodic,

    #[error("configuration has length {got}, chain has {expected} sites")]
    Length { expected: usize, got: usize },

    #[error("spin value {value} at site {site} is out of range 0..{d}")]
    Range { site: usize, value: usize, d: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("net budget exceeded: {required} points needed, ceiling is {ceiling}")]
    Budget { required: u64, ceiling: u64 },

    #[error("query on an empty net")]
    EmptyNet,

    #[error("bond {bond} carries numerically zero weight (rank {rank} < {expected})")]
    RankDeficiency {
        bond: usize,
        rank: usize,
        expected: usize,
    },

    #[error("operation requires an open chain; fold periodic chains first")]
    Boundary,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("problem size {size} exceeds ceiling {ceiling}")]
    Size { size: u64, ceiling: u64 },

    #[error("state is not normalized (norm {0:.12})")]
    Norm(f64),

    #[error("net cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Malformed or invalid user input.
    Input,
    /// A budget or size ceiling was hit.
    Resource,
    /// An internal consistency check failed.
    Internal,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Budget { .. } | Error::Size { .. } => ErrorCategory::Resource,
            Error::Cache(_) | Error::Io(_) => ErrorCategory::Internal,
            Error::RankDeficiency { .. } => ErrorCategory::Internal,
            _ => ErrorCategory::Input,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Schema(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
