//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("format error: {0}")]
    Format(String),
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("invalid token id {0}")]
    InvalidTokenId(u32),
    #[error("empty input sequence")]
    EmptyInput,
    #[error("input too long: {len} tokens exceeds maximum {max}")]
    InputTooLong { len: usize, max: usize },
    #[error("target too long: {len} tokens exceeds maximum {max}")]
    TargetTooLong { len: usize, max: usize },
    #[error("invalid target: {0}")]
    InvalidTarget(String),
    #[error("too many facets to enumerate: {0}")]
    TooManyFacets(usize),
    #[error("facet count {0} outside supported range 1..=5")]
    FacetCountRange(usize),
    #[error("unknown objective: {0}")]
    UnknownObjective(String),
    #[error("numeric overflow: {0}")]
    NumericOverflow(String),
    #[error("training diverged at epoch {epoch} (loss {loss})")]
    Diverged { epoch: usize, loss: f64 },
    #[error("alignment too large: {0} items (limit {MAX_ALIGNMENT})", MAX_ALIGNMENT = crate::metrics::MAX_ALIGNMENT)]
    AlignmentTooLarge(usize),
    #[error("bad embedding: {0}")]
    BadEmbedding(String),
    #[error("unmatched queries: {}", .0.join(", "))]
    UnmatchedQueries(Vec<String>),
    #[error("vocabulary mismatch: {0}")]
    VocabMismatch(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
