use thiserror::Error;

/// Errors produced by pnkit operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution function: {0}")]
    InvalidDistribution(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("phi rejected: {condition} violated{}", witness_suffix(*.witness))]
    PhiRejected { condition: String, witness: Option<f64> },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("classification error: {0}")]
    Classification(String),

    #[error("t-norm axiom violated: {0}")]
    TNormAxiom(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn witness_suffix(witness: Option<f64>) -> String {
    match witness {
        Some(x) => format!(" at x = {x}"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
