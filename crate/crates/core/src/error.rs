// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("{path}:{line}: score out of range: {score}")]
    ScoreOutOfRange { path: PathBuf, line: usize, score: f64 },

    #[error("{path}:{line}: duplicate vertex id {id:?}")]
    DuplicateVertex { path: PathBuf, line: usize, id: String },

    #[error("{path}:{line}: edge references unknown vertex {id:?}")]
    UnknownVertex { path: PathBuf, line: usize, id: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Binary container problems: bad magic, unsupported version, truncation.
    #[error("corrupt {kind} file: {msg}")]
    Format { kind: &'static str, msg: String },

    #[error("{kind} file checksum mismatch (stored {stored:#010x}, computed {computed:#010x})")]
    Checksum {
        kind: &'static str,
        stored: u32,
        computed: u32,
    },

    #[error("unknown term {0:?}")]
    UnknownTerm(String),

    #[error("degenerate vector (zero norm)")]
    DegenerateVector,

    #[error("insufficient words: need at least 2, got {0}")]
    InsufficientWords(usize),

    #[error("degenerate clustering: clusters {0} and {1} share a centroid")]
    DegenerateClustering(usize, usize),

    #[error("topic {0:?} is not in the taxonomy")]
    UnknownTopic(String),

    #[error("invalid taxonomy: {0}")]
    InvalidTaxonomy(String),

    #[error("unmatched term {0:?}: no graph keyword resolves to it")]
    UnmatchedTerm(String),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operation requires a non-empty vertex set")]
    EmptyVertexSet,

    #[error("community is not connected")]
    Disconnected,

    #[error("impossible state: {0}")]
    ImpossibleState(String),

    #[error("tree algorithm requested but no KIC-tree index was supplied")]
    MissingIndex,

    #[error("index does not match graph: {0}")]
    IndexMismatch(String),
}
