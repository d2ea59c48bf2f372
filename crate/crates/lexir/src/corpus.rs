//! Collections of the retrieval task: situation queries, prior-case
//! documents, and statutes, loaded from flat files into normalized form.
//!
//! Loading is deterministic: case and statute directories are read in
//! lexicographic label order, and duplicate labels abort with an error.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::text::{normalize, read_utf8, NormalizedDocument, NormalizerConfig};

/// Which collection a document belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DocKind {
    Case,
    Statute,
    Query,
}

/// A document identifier: collection kind plus a label such as `C5`, `S31`,
/// or `AILA_Q2`. Labels contain no whitespace and are unique per corpus.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DocId {
    pub kind: DocKind,
    pub label: String,
}

impl DocId {
    pub fn new(kind: DocKind, label: impl Into<String>) -> Self {
        Self {
            kind,
            label: label.into(),
        }
    }

    pub fn case(label: impl Into<String>) -> Self {
        Self::new(DocKind::Case, label)
    }

    pub fn statute(label: impl Into<String>) -> Self {
        Self::new(DocKind::Statute, label)
    }

    pub fn query(label: impl Into<String>) -> Self {
        Self::new(DocKind::Query, label)
    }
}

impl fmt::Display for DocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// Train/test assignment for a situation query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

/// A query describing a legal situation, with its normalized form attached.
#[derive(Debug, Clone)]
pub struct SituationQuery {
    pub id: DocId,
    pub body: String,
    pub split: Split,
    pub normalized: NormalizedDocument,
}

/// Summary statistics over a corpus's normalized terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusStats {
    pub documents: usize,
    pub total_terms: usize,
    pub vocabulary: usize,
}

/// An ordered, immutable collection of normalized documents with unique ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    documents: Vec<NormalizedDocument>,
}

impl Corpus {
    /// Wraps a document list, rejecting duplicate ids.
    pub fn from_documents(documents: Vec<NormalizedDocument>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for doc in &documents {
            if !seen.insert(doc.doc_id.clone()) {
                return Err(Error::DuplicateDoc {
                    label: doc.doc_id.label.clone(),
                });
            }
        }
        Ok(Self { documents })
    }

    pub fn documents(&self) -> &[NormalizedDocument] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn stats(&self) -> CorpusStats {
        let total_terms = self.documents.iter().map(|d| d.terms.len()).sum();
        let vocabulary = self
            .documents
            .iter()
            .flat_map(|d| d.terms.iter())
            .collect::<BTreeSet<_>>()
            .len();
        CorpusStats {
            documents: self.documents.len(),
            total_terms,
            vocabulary,
        }
    }
}

/// Loads a directory of `<label>.txt` case files, normalizing each body.
/// Documents are ordered lexicographically by label.
pub fn load_case_corpus(dir: &Path, config: &NormalizerConfig) -> Result<Corpus> {
    let files = txt_files_sorted(dir)?;
    let mut documents = Vec::with_capacity(files.len());
    for (label, path) in files {
        let body = read_utf8(&path)?;
        if body.trim().is_empty() {
            return Err(Error::EmptyDocument { path });
        }
        documents.push(normalize(&body, DocId::case(label), config));
    }
    Corpus::from_documents(documents)
}

/// Loads statutes either from a single `label||title||description` file or
/// from a directory of `<label>.txt` files whose first line is the title.
/// The indexed text is the title concatenated with the description.
pub fn load_statutes(path: &Path, config: &NormalizerConfig) -> Result<Corpus> {
    let mut documents = Vec::new();
    if path.is_dir() {
        for (label, file) in txt_files_sorted(path)? {
            let text = read_utf8(&file)?;
            let mut lines = text.lines();
            let title = lines.next().unwrap_or("").trim().to_string();
            let description = lines.collect::<Vec<_>>().join("\n");
            if title.is_empty() {
                return Err(Error::EmptyDocument { path: file });
            }
            documents.push(statute_document(&label, &title, &description, config));
        }
    } else {
        let text = read_utf8(path)?;
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.splitn(3, "||");
            let (label, title, description) =
                match (fields.next(), fields.next(), fields.next()) {
                    (Some(label), Some(title), Some(description)) => {
                        (label.trim(), title.trim(), description)
                    }
                    _ => {
                        return Err(Error::MalformedLine {
                            path: path.to_path_buf(),
                            line: idx + 1,
                            message: "expected label||title||description".into(),
                        })
                    }
                };
            if label.is_empty() || label.chars().any(char::is_whitespace) {
                return Err(Error::MalformedLine {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    message: "label must be non-empty and contain no whitespace".into(),
                });
            }
            if title.is_empty() {
                return Err(Error::MalformedLine {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    message: "statute title must be non-empty".into(),
                });
            }
            documents.push(statute_document(label, title, description, config));
        }
        documents.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    }
    Corpus::from_documents(documents)
}

fn statute_document(
    label: &str,
    title: &str,
    description: &str,
    config: &NormalizerConfig,
) -> NormalizedDocument {
    let text = if description.trim().is_empty() {
        title.to_string()
    } else {
        format!("{title} {description}")
    };
    normalize(&text, DocId::statute(label), config)
}

/// Loads the split file: one query label per line, naming the train queries.
pub fn load_split(path: &Path) -> Result<BTreeSet<String>> {
    let text = read_utf8(path)?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

/// Loads queries from a `label||text` file, in file order. Labels listed in
/// `train_labels` are assigned the train split, all others test.
pub fn load_queries(
    path: &Path,
    config: &NormalizerConfig,
    train_labels: &BTreeSet<String>,
) -> Result<Vec<SituationQuery>> {
    let text = read_utf8(path)?;
    let mut queries = Vec::new();
    let mut seen = BTreeSet::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (label, body) = line.split_once("||").ok_or_else(|| Error::MalformedLine {
            path: path.to_path_buf(),
            line: idx + 1,
            message: "expected label||text".into(),
        })?;
        let label = label.trim();
        if label.is_empty() || label.chars().any(char::is_whitespace) {
            return Err(Error::MalformedLine {
                path: path.to_path_buf(),
                line: idx + 1,
                message: "label must be non-empty and contain no whitespace".into(),
            });
        }
        if !seen.insert(label.to_string()) {
            return Err(Error::DuplicateDoc {
                label: label.to_string(),
            });
        }
        let id = DocId::query(label);
        let split = if train_labels.contains(label) {
            Split::Train
        } else {
            Split::Test
        };
        queries.push(SituationQuery {
            id: id.clone(),
            body: body.to_string(),
            split,
            normalized: normalize(body, id, config),
        });
    }
    Ok(queries)
}

fn txt_files_sorted(dir: &Path) -> Result<Vec<(String, std::path::PathBuf)>> {
    let entries = fs::read_dir(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) != Some("txt") || !path.is_file() {
            continue;
        }
        let label = path
            .file_stem()
            .and_then(|s| s.to_str())
            .map(str::to_string)
            .ok_or_else(|| Error::InvalidUtf8 { path: path.clone() })?;
        files.push((label, path));
    }
    files.sort();
    Ok(files)
}
