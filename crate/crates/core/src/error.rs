use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the model, trainer, simulator and file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{kind} index {index} out of range (len {len})")]
    IndexOutOfRange {
        kind: &'static str,
        index: usize,
        len: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid identifier {id:?}: {reason}")]
    InvalidId { id: String, reason: &'static str },

    #[error("rating {value} outside [-1, 1]{}", line_suffix(*.line))]
    RatingRange { value: f64, line: Option<usize> },

    #[error("duplicate vote for user {user:?} on note {note:?}{}", line_suffix(*.line))]
    DuplicateVote {
        user: String,
        note: String,
        line: Option<usize>,
    },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("training diverged at epoch {epoch} (loss {loss})")]
    Diverged { epoch: usize, loss: f64 },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

fn line_suffix(line: Option<usize>) -> String {
    match line {
        Some(l) => format!(" at line {l}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
