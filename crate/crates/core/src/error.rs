use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = ForageError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum ForageError {
    #[error("config parse error: {0}")]
    Parse(String),

    #[error("invalid config: field `{field}`: {reason}")]
    Validation { field: &'static str, reason: String },

    #[error("capacity exceeded: {requested} requested, {free} free slots")]
    Capacity { requested: usize, free: usize },

    #[error("non-finite {what} for agent uid {uid} at step {step}")]
    NonFinite {
        what: &'static str,
        uid: u64,
        step: u64,
    },

    #[error("non-finite fitness at generation {generation}")]
    NonFiniteFitness { generation: usize },

    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),

    #[error("predicate `{name}` expects {expected} argument(s), got {got}")]
    PredicateArity {
        name: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("unknown sort key `{0}`")]
    UnknownSortKey(String),

    #[error("invalid spawn batch: {0}")]
    InvalidBatch(String),

    #[error("state audit failed: {0}")]
    Audit(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("{path}:{line}: malformed frame: {reason}")]
    Frame {
        path: PathBuf,
        line: u64,
        reason: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ForageError {
    pub(crate) fn validation(field: &'static str, reason: impl Into<String>) -> Self {
        ForageError::Validation {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ForageError::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by user input rather than by a running simulation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            ForageError::Parse(_) | ForageError::Validation { .. }
        )
    }
}
