use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("value {value} is outside the range of variable {variable}")]
    OutOfRange { variable: String, value: f64 },

    #[error("unknown variable {0:?}")]
    UnknownVariable(String),

    #[error("unknown state {state:?} for variable {variable:?}")]
    UnknownState { variable: String, state: String },

    #[error("network contains a cycle through {0:?}")]
    Cycle(String),

    #[error("edge references undeclared node {0:?}")]
    UndeclaredNode(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("evidence has zero probability under the model")]
    ImpossibleEvidence,

    #[error("table mismatch: {0}")]
    KeyMismatch(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
