use alloc::string::String;

/// Errors produced anywhere in the core pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A configuration or scene parameter is out of its domain.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// Tensor or cube dimensions disagree.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// An input that must be non-empty was empty or too short.
    #[error("input too short: {0}")]
    TooShort(String),

    /// A non-finite value was produced or supplied.
    #[error("non-finite value in {0}")]
    NonFinite(String),

    /// Training produced a non-finite loss.
    #[error("training diverged at step {step}: loss = {loss}")]
    Diverged { step: usize, loss: f64 },

    /// The presence detector found no user, so the segment yields no features.
    #[error("segment rejected: {0}")]
    Rejected(String),

    /// Split bookkeeping was violated (e.g. a subject in two splits).
    #[error("split violation: {0}")]
    Split(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}
