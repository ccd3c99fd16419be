use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("structural error: {0}")]
    Structural(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("operands belong to different algebras")]
    ParentMismatch,
    #[error("unsupported base for kernel: {0}")]
    UnsupportedKernelBase(String),
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error("not p-nilpotent: {0}")]
    NotNilpotent(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// A theorem hypothesis does not hold; the check is refused rather than failed.
    #[error("hypothesis not satisfied: {0}")]
    Gated(String),
    #[error("extraction requires m invertible (m = {0})")]
    ExtractionRequiresInvertible(usize),
    #[error("action not generically free: {0}")]
    NotGenericallyFree(String),
    #[error("unsupported composite shape: {0}")]
    UnsupportedComposite(String),
    #[error("constraint violation: {0}")]
    Constraint(String),
    #[error("theta_Y unavailable: {0}")]
    ThetaYUnavailable(String),
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
}

impl Error {
    pub fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    pub fn is_gated(&self) -> bool {
        matches!(self, Error::Gated(_) | Error::ExtractionRequiresInvertible(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
