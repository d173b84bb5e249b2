use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("zero vector has no direction")]
    ZeroVector,

    #[error("non-finite component at index {index}")]
    NonFinite { index: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("gram matrix is numerically singular (condition estimate {condition:.3e})")]
    SingularGram { condition: f64 },

    #[error("invalid tolerance {0}; must be positive and finite")]
    InvalidTolerance(f64),

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("embedding table {} has no entries", .0.display())]
    EmptyTable(PathBuf),

    #[error("no token of the sentence has an embedding (missing: {})", missing.join(" "))]
    EmptySentenceGroup { missing: Vec<String> },

    #[error("{}:{line}: class {value:?} is not one of -1, 0, 1", path.display())]
    InvalidClass {
        path: PathBuf,
        line: usize,
        value: String,
    },

    #[error("need at least 2 records to split, got {0}")]
    TooFewRecords(usize),

    #[error("invalid split fraction {0}; must lie strictly between 0 and 1")]
    InvalidFraction(f64),

    #[error("proximity {0} outside [0, 1]")]
    InvalidProximity(f64),

    #[error("invalid threshold model: {0}")]
    InvalidModel(String),

    #[error("degenerate training data: {0}")]
    DegenerateTraining(String),

    #[error("length mismatch: {golds} gold labels vs {preds} predictions")]
    LengthMismatch { golds: usize, preds: usize },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
