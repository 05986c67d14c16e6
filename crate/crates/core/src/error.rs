use std::io;

use thiserror::Error;

use crate::{CategoryId, VertexId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: negative edge weight {weight}")]
    NegativeWeight { line: usize, weight: i64 },

    #[error("line {line}: malformed record: {reason}")]
    Malformed { line: usize, reason: String },

    #[error("unknown vertex `{0}`")]
    UnknownVertexName(String),

    #[error("vertex {0} out of range")]
    InvalidVertex(VertexId),

    #[error("unknown category `{0}`")]
    UnknownCategoryName(String),

    #[error("unknown category id {0}")]
    UnknownCategory(CategoryId),

    #[error("category sequence must contain at least one category")]
    EmptySequence,

    #[error("k must be at least 1")]
    InvalidK,

    #[error("need {needed} vertices but graph has {available}")]
    InsufficientVertices { needed: usize, available: usize },

    #[error("invalid generator parameter: {0}")]
    InvalidParameter(String),

    #[error("no path between consecutive witness vertices {from} and {to}")]
    Unreachable { from: VertexId, to: VertexId },

    #[error("enumeration would visit {0} witnesses, above the oracle guard")]
    EnumerationGuard(u128),

    #[error("query deadline exceeded")]
    DeadlineExceeded,

    #[error("corrupt index: {0}")]
    Corrupt(String),

    #[error("index is locked by another writer ({0})")]
    Locked(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// True for errors caused by bad input rather than by the environment.
    pub fn is_user_error(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Corrupt(_))
    }
}
