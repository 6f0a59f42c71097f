use thiserror::Error;

/// Errors raised across the factorization toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum VolNmfError {
    #[error("matrix is not positive definite (Cholesky pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("power iteration did not converge after {iterations} iterations")]
    ConvergenceFailure { iterations: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("|logdet| = {0:e} is too small to normalize the regularization weight")]
    DegenerateScale(f64),

    #[error("matrix has rank {rank} but the check requires rank {required}")]
    RankDeficient { rank: usize, required: usize },

    #[error("no extreme rays of the dual cone were found")]
    DegenerateRays,

    #[error("rejection sampler stalled after {0} consecutive rejections")]
    RejectionStall(usize),

    #[error("SSC block with beta = {beta} failed the exact checker")]
    SscConstructionFailed { beta: f64 },

    #[error("column {0} has non-positive sum")]
    ZeroColumn(usize),

    #[error("estimated column {0} has vanishing norm")]
    ColumnCollapse(usize),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("ragged rows: line {line} has {found} fields, expected {expected}")]
    RaggedRows {
        line: usize,
        found: usize,
        expected: usize,
    },

    #[error("embedded dataset checksum mismatch")]
    ChecksumMismatch,

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for VolNmfError {
    fn from(e: std::io::Error) -> Self {
        VolNmfError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, VolNmfError>;
