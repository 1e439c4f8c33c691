use thiserror::Error;

/// Errors raised by the algebra kernel.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("universe mismatch: {0}")]
    Universe(String),

    #[error("resource limit exceeded: {0}")]
    ResourceExceeded(String),

    #[error("invalid presentation: {0}")]
    Presentation(String),

    #[error("incompatible representatives: {0}")]
    Compatibility(String),

    #[error("ill-defined derivation: image of {generator} is not in the level-{level} ideal")]
    IllDefinedDerivation { generator: String, level: usize },

    #[error("operation requires a certified integrable derivation: {0}")]
    RequiresCertificate(String),

    #[error("precondition failed for {mode}: {witness}")]
    Precondition { mode: String, witness: String },

    #[error("derivation is not locally nilpotent on {generator} within {bound} steps")]
    NotLocallyNilpotent { generator: String, bound: usize },

    #[error("exponent overflow")]
    ExponentOverflow,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn universe(msg: impl Into<String>) -> Self {
        Error::Universe(msg.into())
    }

    pub(crate) fn precondition(mode: impl Into<String>, witness: impl Into<String>) -> Self {
        Error::Precondition {
            mode: mode.into(),
            witness: witness.into(),
        }
    }
}
