use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Invalid parameters, shapes or ranges supplied by the caller.
    #[error("configuration error: {0}")]
    Config(String),

    /// A numerical routine failed (non-convergence, zero norm, ...).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A recursion whose fixed point does not exist (recurrence gain >= 1).
    #[error("divergent recursion: {0}")]
    Divergent(String),

    /// The closed-form recursions only hold for global coupling and single input neurons.
    #[error("analytic model not applicable: {0}")]
    NotApplicable(String),

    /// Not enough curve points to form a summary.
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
