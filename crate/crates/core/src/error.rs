use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: malformed record: {message}")]
    MalformedRecord { line: usize, message: String },

    #[error("line {line}: duplicate news id {id:?}")]
    DuplicateNewsId { line: usize, id: String },

    #[error("line {line}: label must be -1, 1 or null, got {value}")]
    InvalidLabel { line: usize, value: String },

    #[error("{0}")]
    InvalidParameter(String),

    #[error("cannot normalize edgeless graph")]
    EdgelessGraph,

    #[error("series divergent: spectral radius bound {bound:.9} is not below {threshold:.9}")]
    SeriesDivergent { bound: f64, threshold: f64 },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("degenerate split: no split with both classes in test after {attempts} attempts")]
    DegenerateSplit { attempts: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unknown news id {0:?}")]
    UnknownNews(String),

    #[error("news {0:?} has no label")]
    UnlabeledNews(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for errors caused by caller-supplied parameters rather than data.
    pub fn is_parameter_error(&self) -> bool {
        matches!(self, Error::InvalidParameter(_))
    }
}
