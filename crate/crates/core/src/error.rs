use thiserror::Error;

/// Errors produced by the filtering toolkit.
#[derive(Debug, Error)]
pub enum FwfError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("series lengths differ: {left} vs {right}")]
    Alignment { left: usize, right: usize },

    #[error("value {value} outside the domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("lag {lag} outside profile of length {len}")]
    Range { lag: usize, len: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("matrix is not positive definite (pivot {pivot:e} at row {row}); increase the ridge")]
    Conditioning { pivot: f64, row: usize },

    #[error("integration diverged at step {step}")]
    Divergence { step: usize },

    #[error("degenerate series: {0}")]
    Degenerate(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, FwfError>;

pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> FwfError {
    FwfError::Parameter {
        name,
        reason: reason.into(),
    }
}
