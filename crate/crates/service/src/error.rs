use harvest_core::CoreError;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, ServiceError>;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("unknown bundle {0}")]
    UnknownBundle(String),
    #[error("solution {0} is not in the archive")]
    UnknownSolution(u32),
    #[error("domain criteria have not been set")]
    CriteriaNotSet,
    #[error("solution {0} is not on the shortlist")]
    NotShortlisted(u32),
    #[error("session is already finalized")]
    Finalized,
    #[error("invalid threshold: {0}")]
    InvalidThreshold(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("missing artifact: {0}")]
    MissingArtifact(String),
    #[error("fingerprint mismatch: {0}")]
    FingerprintMismatch(String),
    #[error("replay diverged at record {seq}: expected {expected:?}, got {actual:?}")]
    ReplayDiverged {
        seq: u64,
        expected: Vec<u32>,
        actual: Vec<u32>,
    },
    #[error(transparent)]
    Core(CoreError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<CoreError> for ServiceError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::FingerprintMismatch(m) => ServiceError::FingerprintMismatch(m),
            e => ServiceError::Core(e),
        }
    }
}

impl ServiceError {
    /// Stable machine-readable code used in API error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownSession(_) => "unknown-session",
            ServiceError::UnknownBundle(_) => "unknown-bundle",
            ServiceError::UnknownSolution(_) => "unknown-solution",
            ServiceError::CriteriaNotSet => "criteria-not-set",
            ServiceError::NotShortlisted(_) => "not-shortlisted",
            ServiceError::Finalized => "finalized",
            ServiceError::InvalidThreshold(_) => "invalid-threshold",
            ServiceError::InvalidRequest(_) => "invalid-request",
            ServiceError::MissingArtifact(_) => "missing-artifact",
            ServiceError::FingerprintMismatch(_) => "fingerprint-mismatch",
            ServiceError::ReplayDiverged { .. } => "replay-diverged",
            ServiceError::Core(_) => "core",
            ServiceError::Io(_) => "io",
        }
    }
}
