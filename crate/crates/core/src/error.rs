use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("snapshot matrix has numerical rank {achievable}, cannot extract {requested} modes")]
    RankDeficient { achievable: usize, requested: usize },

    #[error("configuration error: {0}")]
    Config(String),

    /// The caller violated an API protocol (e.g. stepping a finished episode).
    #[error("usage error: {0}")]
    Usage(String),

    /// Time integration blew up. `step` is the index of the step that failed.
    #[error("integration diverged at step {step} (|alpha|_inf = {norm:e})")]
    Divergence { step: usize, norm: f64 },

    #[error("non-finite loss in PPO update (epoch {epoch})")]
    NonFiniteLoss { epoch: usize },

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
