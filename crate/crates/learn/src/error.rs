use thiserror::Error;

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("empty dataset")]
    EmptyDataset,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("too few samples: need at least {need}, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("degenerate target: {0}")]
    DegenerateTarget(String),
    #[error("singular design matrix")]
    SingularDesign,
    #[error("tree node {0} has no usable cover")]
    MissingCover(usize),
    #[error("feature layout mismatch at column {index}: model has `{expected}`, input has `{got}`")]
    LayoutMismatch { index: usize, expected: String, got: String },
    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u64),
    #[error("malformed model file: {0}")]
    Format(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LearnError>;
