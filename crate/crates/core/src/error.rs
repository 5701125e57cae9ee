use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("corrupt RLE: {0}")]
    CorruptRle(String),

    #[error("corrupt RLE counts string: {0}")]
    CorruptString(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("empty segmentation")]
    EmptySegmentation,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("conflict: {0}")]
    Conflict(String),

    #[error("integrity error: {0}")]
    Integrity(String),

    /// A line-oriented input failed validation.
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },

    #[error("line {line}: score {score} outside [0, 1]")]
    ScoreRange { line: usize, score: f64 },

    #[error("dataset too small: {0}")]
    TooSmall(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("missing data: {0}")]
    MissingData(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid_argument(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
