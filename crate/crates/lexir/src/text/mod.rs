//! Text normalization pipeline: tokenize, drop numeric tokens, remove
//! stopwords, stem, lemmatize.
//!
//! Every stage is a pure function and independently toggleable through
//! [`NormalizerConfig`]; the default configuration enables all of them.

pub mod porter;

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use crate::corpus::DocId;
use crate::error::{Error, Result};

/// The bundled English stopword list (179 entries).
const BUNDLED_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");

/// A set of lowercase tokens removed by the stopword stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopwordList {
    entries: HashSet<String>,
}

impl StopwordList {
    /// The bundled English list.
    pub fn bundled_english() -> Self {
        Self::from_lines(BUNDLED_STOPWORDS.lines())
    }

    pub fn empty() -> Self {
        Self {
            entries: HashSet::new(),
        }
    }

    /// One token per line; blank lines and `#`-prefixed comment lines are
    /// ignored.
    pub fn from_lines<'a>(lines: impl IntoIterator<Item = &'a str>) -> Self {
        let entries = lines
            .into_iter()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        Self { entries }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = read_utf8(path)?;
        Ok(Self::from_lines(text.lines()))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.entries.contains(token)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl<const N: usize> From<[&str; N]> for StopwordList {
    fn from(words: [&str; N]) -> Self {
        Self {
            entries: words.iter().map(|w| w.to_lowercase()).collect(),
        }
    }
}

/// Surface-form to lemma mapping; lookup misses fall back to the input token.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LemmaDictionary {
    entries: HashMap<String, String>,
}

impl LemmaDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, surface: &str, lemma: &str) {
        self.entries
            .insert(surface.to_lowercase(), lemma.to_lowercase());
    }

    /// Parses two whitespace-separated tokens per line (surface, lemma).
    /// Blank lines and `#`-prefixed comment lines are ignored.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = read_utf8(path)?;
        let mut dict = Self::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split_whitespace();
            match (fields.next(), fields.next(), fields.next()) {
                (Some(surface), Some(lemma), None) => dict.insert(surface, lemma),
                _ => {
                    return Err(Error::MalformedLine {
                        path: path.to_path_buf(),
                        line: idx + 1,
                        message: "expected two whitespace-separated tokens".into(),
                    })
                }
            }
        }
        Ok(dict)
    }

    pub fn lookup<'a>(&'a self, token: &'a str) -> &'a str {
        self.entries.get(token).map(String::as_str).unwrap_or(token)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Pipeline configuration. Stage order is fixed: tokenize, strip numbers,
/// remove stopwords, stem, lemmatize.
#[derive(Debug, Clone)]
pub struct NormalizerConfig {
    pub strip_numbers: bool,
    pub stopwords: StopwordList,
    pub stem: bool,
    pub lemmas: Option<LemmaDictionary>,
}

impl Default for NormalizerConfig {
    fn default() -> Self {
        Self {
            strip_numbers: true,
            stopwords: StopwordList::bundled_english(),
            stem: true,
            lemmas: None,
        }
    }
}

impl NormalizerConfig {
    /// All stages disabled: normalize reduces to tokenize.
    pub fn passthrough() -> Self {
        Self {
            strip_numbers: false,
            stopwords: StopwordList::empty(),
            stem: false,
            lemmas: None,
        }
    }
}

/// A document reduced to its normalized term sequence.
///
/// `raw_token_count` is the token count before any filtering stage ran, so it
/// is always at least `terms.len()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedDocument {
    pub doc_id: DocId,
    pub terms: Vec<String>,
    pub raw_token_count: usize,
}

/// Splits text into lowercased maximal runs of alphanumeric characters.
/// All punctuation and whitespace acts as a separator.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            current.extend(ch.to_lowercase());
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Removes tokens consisting solely of digit characters. Mixed tokens such as
/// "302a" survive.
pub fn strip_numbers(mut tokens: Vec<String>) -> Vec<String> {
    tokens.retain(|t| !t.chars().all(|c| c.is_numeric()));
    tokens
}

/// Removes tokens present in the stopword list; order of survivors preserved.
pub fn remove_stopwords(mut tokens: Vec<String>, stoplist: &StopwordList) -> Vec<String> {
    tokens.retain(|t| !stoplist.contains(t));
    tokens
}

/// Porter-stems a token; see [`porter::stem`].
pub fn porter_stem(token: &str) -> String {
    porter::stem(token)
}

/// Dictionary lemmatization with identity fallback.
pub fn lemmatize(token: &str, dict: &LemmaDictionary) -> String {
    dict.lookup(token).to_string()
}

/// Runs the full pipeline over raw text, skipping disabled stages.
pub fn normalize(text: &str, doc_id: DocId, config: &NormalizerConfig) -> NormalizedDocument {
    let tokens = tokenize(text);
    let raw_token_count = tokens.len();
    let tokens = if config.strip_numbers {
        strip_numbers(tokens)
    } else {
        tokens
    };
    let tokens = remove_stopwords(tokens, &config.stopwords);
    let tokens = if config.stem {
        tokens.iter().map(|t| porter_stem(t)).collect()
    } else {
        tokens
    };
    let terms = match &config.lemmas {
        Some(dict) => tokens.iter().map(|t| lemmatize(t, dict)).collect(),
        None => tokens,
    };
    NormalizedDocument {
        doc_id,
        terms,
        raw_token_count,
    }
}

pub(crate) fn read_utf8(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    String::from_utf8(bytes).map_err(|_| Error::InvalidUtf8 {
        path: path.to_path_buf(),
    })
}
