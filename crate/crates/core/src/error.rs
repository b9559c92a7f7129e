use thiserror::Error;

/// Errors surfaced by the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("matrix is singular")]
    SingularMatrix,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("gap violation at index {index}: A_{{n+1}} A_n^{{-1}} is not expanding")]
    GapViolation { index: usize },

    #[error("matrix sequence has no element at index {index} (length {len})")]
    SequenceExhausted { index: usize, len: usize },

    #[error("capacity exceeded: {what} needs {needed}, cap is {cap}")]
    Capacity { what: String, needed: u128, cap: u128 },

    #[error("precision shortfall: {have} bits supplied, at least {required} bits required")]
    Precision { have: u64, required: u64 },

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("invalid argument `{field}`: {reason}")]
    InvalidArgument { field: String, reason: String },
}

impl LabError {
    pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Self {
        LabError::InvalidArgument {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
