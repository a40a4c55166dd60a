use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameter combination (unsupported modulation order, N not dividing N_tr, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Caller violated a shape or value precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("symbol book too large: K = {count} exceeds cap {cap}")]
    Size { count: u128, cap: usize },

    /// The channel Gram matrix could not be inverted.
    #[error("rank-deficient channel: {0}")]
    RankDeficient(String),

    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Training { epoch: usize, loss: f64 },

    #[error("parse error in {path}: {msg}")]
    Parse { path: PathBuf, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// `true` for errors that stem from user-supplied configuration.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Size { .. } | Error::Parse { .. } | Error::Contract(_)
        )
    }
}
