use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("series too short to split")]
    SeriesTooShort,
    #[error("empty context")]
    EmptyContext,
    #[error("degenerate segment")]
    DegenerateSegment,
    #[error("infeasible block scenario")]
    InfeasibleBlocks,
    #[error("covariate not fully observed")]
    CovariateNotObserved,
    #[error("covariate required")]
    CovariateRequired,
    #[error("undefined scale")]
    UndefinedScale,
    #[error("incomplete score matrix")]
    IncompleteScoreMatrix,
    #[error("non-uniform sampling")]
    NonUniformSampling,
    #[error("duplicate timestamp {0}")]
    DuplicateTimestamp(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("non-finite input")]
    NonFinite,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown imputer `{0}`")]
    UnknownImputer(String),
    #[error("dataset ingestion failed: {}", .0.join("; "))]
    Datasets(Vec<String>),
    #[error("{context}: {source}")]
    Imputation {
        context: String,
        #[source]
        source: Box<Error>,
    },
    #[error("config: {0}")]
    Config(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
