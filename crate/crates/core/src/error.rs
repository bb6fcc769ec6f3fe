use thiserror::Error;

use crate::backend::{Backend, Object};

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the categorical layer (backends, combs, families).
///
/// The circuit language has its own diagnostics in [`crate::dsl`]; they wrap
/// these values together with a source span.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("type mismatch in {context}: {left} does not match {right}")]
    TypeMismatch {
        context: String,
        left: Object,
        right: Object,
    },

    #[error("backend mismatch: {left} vs {right}")]
    BackendMismatch { left: Backend, right: Backend },

    #[error("{operation} is not supported on the {backend} backend")]
    Unsupported { operation: String, backend: Backend },

    #[error("invalid object: {0}")]
    InvalidObject(String),

    #[error("invalid morphism: {0}")]
    InvalidMorphism(String),

    #[error("piece {piece} is ill-typed: expected {expected}, found {found}")]
    PieceTyping {
        piece: usize,
        expected: String,
        found: String,
    },

    #[error("slide at memory {position}: {reason}")]
    Slide { position: usize, reason: String },

    #[error("boundary mismatch: {0}")]
    Boundary(String),

    #[error("family shape: {0}")]
    FamilyShape(String),

    #[error("object with {0} elements exceeds the supported size")]
    TooLarge(u128),

    #[error("stage {stage} lies beyond the available depth {depth}")]
    DepthExceeded { stage: usize, depth: usize },
}

impl Error {
    pub(crate) fn mismatch(context: impl Into<String>, left: &Object, right: &Object) -> Self {
        Error::TypeMismatch {
            context: context.into(),
            left: left.clone(),
            right: right.clone(),
        }
    }

    pub(crate) fn unsupported(operation: impl Into<String>, backend: Backend) -> Self {
        Error::Unsupported {
            operation: operation.into(),
            backend,
        }
    }

    /// True for errors that report a missing capability rather than a typing fault.
    pub fn is_unsupported(&self) -> bool {
        matches!(self, Error::Unsupported { .. })
    }
}
