use thiserror::Error;

use crate::trace::TraceRecord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    /// A run stopped on a non-finite objective value. The trace collected
    /// up to that point is kept so callers can still flush it.
    #[error("run aborted: {reason}")]
    Aborted { reason: String, partial_trace: Box<Vec<TraceRecord>> },

    #[error("solver diverged: {0}")]
    Diverged(String),

    #[error("ingestion error at {location}: {message}")]
    Ingestion { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { field: field.into(), message: message.into() }
    }

    pub(crate) fn ingestion(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Ingestion { location: location.into(), message: message.into() }
    }

    /// True for errors a caller should treat as a bad configuration
    /// (as opposed to a numerical failure or an I/O problem).
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::InvalidArgument(_) | Error::Config { .. } | Error::Json(_) | Error::Ingestion { .. })
    }

    /// True for numerical failures of a solver run.
    pub fn is_solver_failure(&self) -> bool {
        matches!(self, Error::Aborted { .. } | Error::Diverged(_))
    }
}
