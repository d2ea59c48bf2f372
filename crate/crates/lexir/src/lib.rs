//! Legal-document retrieval engine.
//!
//! Retrieves prior cases and statutes for situation queries with two ranking
//! backends, plus the evaluation harness used to score them:
//!
//! - [`bm25`]: an inverted index with Okapi BM25 scoring
//! - [`pvdm`]: distributed-memory paragraph vectors (PV-DM) trained from
//!   scratch with negative sampling, ranked by cosine similarity
//! - [`text`]: the preprocessing pipeline (tokenization, number removal,
//!   stopword removal, Porter stemming, dictionary lemmatization)
//! - [`corpus`]: flat-file loaders for cases, statutes, and queries
//! - [`eval`]: Prec@10, MAP, bpref, and MRR over TREC-style run/qrels files
//!
//! The `lexir` binary (in the companion CLI crate) wires these into
//! reproducible end-to-end retrieval runs.

pub mod bm25;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod pvdm;
pub mod text;

pub use bm25::{Bm25Params, InvertedIndex, ScoredDoc};
pub use corpus::{
    load_case_corpus, load_queries, load_split, load_statutes, Corpus, CorpusStats, DocId,
    DocKind, SituationQuery, Split,
};
pub use error::{Error, Result};
pub use eval::{
    evaluate_run, parse_qrels, parse_run, write_run, MetricsReport, Qrels, RankedRun,
};
pub use pvdm::{train, InferParams, PvDmConfig, PvDmModel, Vocabulary};
pub use text::{normalize, LemmaDictionary, NormalizedDocument, NormalizerConfig, StopwordList};
