//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A simulated trajectory left the finite-state guard region.
    #[error("trajectory diverged at step {step}{}", trajectory.map(|i| format!(" (trajectory {i})")).unwrap_or_default())]
    Diverged {
        step: usize,
        trajectory: Option<usize>,
    },

    /// The certificate line search found no positive-definite candidate.
    /// Theory guarantees existence under the drift assumptions, so this
    /// signals a search-resolution problem rather than a model defect.
    #[error("stability certificate not found: {0}")]
    CertificateNotFound(String),

    /// An iterative solver produced non-finite intermediates.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
