use thiserror::Error;

/// Errors raised by scenario construction and the analyses built on it.
#[derive(Debug, Error)]
pub enum Error {
    #[error("structural error: {0}")]
    Structure(String),

    #[error("normalization error: {0}")]
    Normalization(String),

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    /// An operation needs a unique best reply where there is a tie.
    #[error("best reply to {action} in state {state} is not unique (tied: {})", tied.join(", "))]
    NotSingleton {
        state: String,
        action: String,
        tied: Vec<String>,
    },

    #[error("mixed action {0} is not a commitment action of this scenario")]
    UnknownCommitmentAction(String),

    #[error("off-path observation of {action} at t={t}")]
    OffPath { t: usize, action: String },

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
