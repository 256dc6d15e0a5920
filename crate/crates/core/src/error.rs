//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("algebra dimension {0} out of supported range 2..=10")]
    UnsupportedDimension(usize),

    #[error("jet order mismatch: expected {expected}, got {got}")]
    OrderMismatch { expected: usize, got: usize },

    #[error("jet order {got} too low, operator needs {needed}")]
    InsufficientOrder { needed: usize, got: usize },

    #[error("multi-index of degree {degree} exceeds jet order {order}")]
    IndexOutOfOrder { degree: usize, order: usize },

    #[error("operand is not a grade-1 element")]
    NotGrade1,

    #[error("singular evaluation: {context}")]
    Singularity {
        context: String,
        /// Series index at which the singularity was detected, when applicable.
        orbit_index: Option<i64>,
    },

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("{0}")]
    Unsupported(String),
}

impl Error {
    pub fn singular(context: impl Into<String>) -> Self {
        Error::Singularity {
            context: context.into(),
            orbit_index: None,
        }
    }

    pub fn singular_at(context: impl Into<String>, index: i64) -> Self {
        Error::Singularity {
            context: context.into(),
            orbit_index: Some(index),
        }
    }

    pub fn constraint(msg: impl Into<String>) -> Self {
        Error::Constraint(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
