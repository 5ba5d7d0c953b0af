//! Error taxonomy shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, VittmError>;

#[derive(Debug, Error)]
pub enum VittmError {
    /// Tensor shapes do not conform for an operation.
    #[error("dimension mismatch in {op}: {lhs:?} vs {rhs:?}")]
    Dimension {
        op: &'static str,
        lhs: Vec<usize>,
        rhs: Vec<usize>,
    },

    /// Operands carry different element types.
    #[error("dtype mismatch in {op}: {lhs:?} vs {rhs:?}")]
    DTypeMismatch {
        op: &'static str,
        lhs: crate::tensor::DType,
        rhs: crate::tensor::DType,
    },

    /// A model or task configuration is invalid.
    #[error("configuration error: {0}")]
    Config(String),

    /// A preset name is not in the documented list.
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),

    /// An API precondition was violated.
    #[error("contract violation: {0}")]
    Contract(String),

    /// On-disk data does not match the expected binary format.
    #[error("format error: {0}")]
    Format(String),

    /// A checkpoint does not fit the model it is being loaded into.
    #[error("incompatible checkpoint: {0}")]
    Compatibility(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl VittmError {
    pub(crate) fn dim(op: &'static str, lhs: &[usize], rhs: &[usize]) -> Self {
        VittmError::Dimension {
            op,
            lhs: lhs.to_vec(),
            rhs: rhs.to_vec(),
        }
    }
}
