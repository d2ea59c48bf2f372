//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by corpus loading, indexing, training, and evaluation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("file is not valid UTF-8: {path}")]
    InvalidUtf8 { path: PathBuf },

    #[error("{path}:{line}: {message}")]
    MalformedLine {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("empty document: {path}")]
    EmptyDocument { path: PathBuf },

    #[error("duplicate document id: {label}")]
    DuplicateDoc { label: String },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("unknown document id: {label}")]
    UnknownDoc { label: String },

    #[error("cutoff must be at least 1")]
    ZeroCutoff,

    #[error("invalid BM25 parameters: {message}")]
    InvalidParams { message: String },

    #[error("vocabulary is empty after frequency filtering")]
    EmptyVocabulary,

    #[error("document shares no vocabulary terms with the model: {label}")]
    EmptyOverlap { label: String },

    #[error("cosine is undefined for a zero vector")]
    ZeroVector,

    #[error("bad file format: {message}")]
    Format { message: String },

    #[error("unsupported file version: {found}")]
    VersionMismatch { found: u8 },

    #[error("checksum mismatch (file truncated or corrupted)")]
    ChecksumMismatch,

    #[error("run and qrels share no query labels")]
    NoOverlappingQueries,
}

pub type Result<T> = std::result::Result<T, Error>;
