use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty hyperedge")]
    EmptyHyperedge,

    #[error("non-monotone timestamp: {got} arrived after {previous}")]
    NonMonotoneTimestamp { previous: f64, got: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty history")]
    EmptyHistory,

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("degenerate labels: evaluation needs at least one positive and one negative")]
    DegenerateLabels,

    #[error("k = {k} exceeds the {available} evaluated entries")]
    KTooLarge { k: usize, available: usize },

    #[error("label index {index} is not among the {len} scores")]
    UnknownIndex { index: usize, len: usize },

    #[error("index mismatch between score sets")]
    IndexMismatch,

    #[error("injection failed: {0}")]
    Injection(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid checkpoint: {0}")]
    Checkpoint(String),

    #[error(
        "oracle mismatch at timestamp {timestamp}: summary {summary}, entry ({row}, {col}) \
         incremental {incremental} vs batch {batch}"
    )]
    OracleMismatch {
        timestamp: f64,
        summary: usize,
        row: usize,
        col: usize,
        incremental: f64,
        batch: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Attaches a 1-based input line number to stream-level errors.
    pub fn at_line(self, line: usize) -> Error {
        match self {
            Error::Parse { .. } => self,
            other => Error::Parse {
                line,
                message: other.to_string(),
            },
        }
    }
}
