use serde::{Deserialize, Serialize};

/// Why a protocol run stopped producing certified randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AbortReason {
    /// The witness product (gap between test-state expectations, after noise
    /// and fluctuation penalties) went negative; no C bound can be certified.
    NonPositiveWitness,
    /// The finite-size length formula came out non-positive.
    NegativeLength,
}

impl std::fmt::Display for AbortReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AbortReason::NonPositiveWitness => write!(f, "non-positive witness product"),
            AbortReason::NegativeLength => write!(f, "non-positive extractable length"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("protocol abort: {0}")]
    Abort(AbortReason),
    #[error("length mismatch: {0}")]
    InvalidLength(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("prerequisite failed: {0}")]
    PrerequisiteFailed(String),
    #[error("run aborted: {0}")]
    AbortedRun(String),
    #[error("bad configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code contract: 0 success, 2 validation, 3 protocol abort,
    /// 4 bound violation (assigned by the verify command), 5 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidModel(_)
            | Error::InvalidLength(_)
            | Error::InsufficientData(_)
            | Error::PrerequisiteFailed(_)
            | Error::Config(_) => 2,
            Error::Abort(_) | Error::AbortedRun(_) => 3,
            Error::Io(_) | Error::Json(_) => 5,
        }
    }
}
