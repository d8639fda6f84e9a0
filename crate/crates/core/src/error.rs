use thiserror::Error;

use crate::network::Network;

pub type Result<T, E = MeeError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum MeeError {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The caller violated a precondition (shapes, sizes, missing fields).
    #[error("usage error: {0}")]
    Usage(String),

    /// An adaptive numerical routine failed to converge.
    #[error(
        "numeric error: {message} (estimate {estimate:e}, error bound {error_bound:e}, {evaluations} evaluations)"
    )]
    Numeric {
        message: String,
        estimate: f64,
        error_bound: f64,
        evaluations: usize,
    },

    /// A generated series left the stable region.
    #[error("instability: {0}")]
    Instability(String),

    /// Training produced a non-finite objective. Carries the last network
    /// whose parameters were all finite.
    #[error("divergence at epoch {epoch}: {message}")]
    Divergence {
        epoch: usize,
        message: String,
        checkpoint: Box<Network>,
    },

    /// Requested information is not available (e.g. a dataset imported
    /// without generator provenance).
    #[error("unavailable: {0}")]
    Unavailable(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl MeeError {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        MeeError::Usage(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        MeeError::Domain(msg.into())
    }
}
