use std::path::PathBuf;

use thiserror::Error;

/// Errors produced while loading data, training, or evaluating models.
#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate rating for user {user:?} and item {item:?}")]
    DuplicateRating { user: String, item: String },

    #[error("invalid rating triple: {0}")]
    InvalidTriple(String),

    #[error("unknown {axis} {token:?}")]
    UnknownEntity { axis: crate::Axis, token: String },

    #[error("cannot take the mean of an empty {0}")]
    EmptyScope(&'static str),

    #[error("{path}:{line}: expected at least {expected} columns, found {found}")]
    MalformedLine {
        path: PathBuf,
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("{path}:{line}: cannot parse rating {text:?}")]
    RatingParse {
        path: PathBuf,
        line: u64,
        text: String,
    },

    #[error("invalid file spec: {0}")]
    InvalidSpec(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("training diverged in epoch {epoch}")]
    TrainingDiverged { epoch: usize },

    #[error("cannot evaluate an empty test set")]
    EmptyEvaluation,

    #[error("model format: {0}")]
    ModelFormat(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}
