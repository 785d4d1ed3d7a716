use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown system `{0}`")]
    UnknownSystem(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("requested {requested} clusters but only {available} distinct points")]
    TooManyClusters { requested: usize, available: usize },

    #[error("class {0} has no points")]
    EmptyClass(usize),

    #[error("non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("direction vectors do not span the state space")]
    RankDeficient,

    #[error("complex too large: {0}")]
    ComplexTooLarge(String),

    #[error("not enough realizations: need {needed}, have {have}")]
    InsufficientRealizations { needed: usize, have: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
