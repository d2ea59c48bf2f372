//! Okapi BM25 ranking over an inverted index.
//!
//! The idf variant is the nonnegative form `ln(1 + (N - df + 0.5)/(df + 0.5))`,
//! which stays positive even when a term appears in more than half the corpus
//! (common in small statute collections). Duplicate query terms multiply the
//! per-term contribution; there is no query-side saturation.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use crate::corpus::{Corpus, DocId, DocKind};
use crate::error::{Error, Result};
use crate::text::NormalizedDocument;

/// BM25 free parameters. `k1` controls term-frequency saturation, `b` the
/// strength of document-length normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 1.2, b: 0.75 }
    }
}

impl Bm25Params {
    pub fn new(k1: f64, b: f64) -> Result<Self> {
        if !(k1 >= 0.0 && k1.is_finite()) {
            return Err(Error::InvalidParams {
                message: format!("k1 must be a nonnegative finite number, got {k1}"),
            });
        }
        if !(0.0..=1.0).contains(&b) {
            return Err(Error::InvalidParams {
                message: format!("b must lie in [0, 1], got {b}"),
            });
        }
        Ok(Self { k1, b })
    }
}

/// One document's term frequency within a posting list. `doc` indexes the
/// index's sorted document table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub doc: u32,
    pub tf: u32,
}

/// A document with its retrieval score.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredDoc {
    pub doc: DocId,
    pub score: f64,
}

/// An immutable inverted index: term posting lists plus per-document lengths.
///
/// Documents are held in ascending `DocId` order; posting lists are ascending
/// by document and the document frequency of a term is its posting-list
/// length. Safe to share across threads once built.
#[derive(Debug, Clone, PartialEq)]
pub struct InvertedIndex {
    docs: Vec<DocId>,
    doc_len: Vec<u64>,
    avgdl: f64,
    postings: BTreeMap<String, Vec<Posting>>,
}

impl InvertedIndex {
    /// Builds the index over a normalized corpus. Errors on an empty corpus;
    /// documents with zero terms keep length 0 and join no posting list.
    pub fn build(corpus: &Corpus) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut order: Vec<&NormalizedDocument> = corpus.documents().iter().collect();
        order.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));

        let docs: Vec<DocId> = order.iter().map(|d| d.doc_id.clone()).collect();
        let doc_len: Vec<u64> = order.iter().map(|d| d.terms.len() as u64).collect();
        let avgdl = doc_len.iter().sum::<u64>() as f64 / docs.len() as f64;

        let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        for (doc_idx, doc) in order.iter().enumerate() {
            let mut tf: HashMap<&str, u32> = HashMap::new();
            for term in &doc.terms {
                *tf.entry(term.as_str()).or_insert(0) += 1;
            }
            let mut terms: Vec<(&str, u32)> = tf.into_iter().collect();
            terms.sort_unstable();
            for (term, tf) in terms {
                postings.entry(term.to_string()).or_default().push(Posting {
                    doc: doc_idx as u32,
                    tf,
                });
            }
        }
        Ok(Self {
            docs,
            doc_len,
            avgdl,
            postings,
        })
    }

    pub fn n_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn avgdl(&self) -> f64 {
        self.avgdl
    }

    pub fn docs(&self) -> &[DocId] {
        &self.docs
    }

    /// Number of documents containing `term` (0 for unseen terms).
    pub fn df(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    pub fn doc_len(&self, doc: &DocId) -> Option<u64> {
        self.doc_index(doc).map(|i| self.doc_len[i])
    }

    fn doc_index(&self, doc: &DocId) -> Option<usize> {
        self.docs.binary_search(doc).ok()
    }

    /// Inverse document frequency, `ln(1 + (N - df + 0.5)/(df + 0.5))`.
    /// Nonnegative for every df in [0, N]; unseen terms get the df = 0 value
    /// but contribute nothing at query time since their tf is 0 everywhere.
    pub fn idf(&self, term: &str) -> f64 {
        let n = self.docs.len() as f64;
        let df = self.df(term) as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    fn tf_norm(&self, tf: u32, doc_len: u64, params: &Bm25Params) -> f64 {
        let tf = tf as f64;
        let norm = 1.0 - params.b + params.b * doc_len as f64 / self.avgdl;
        tf * (params.k1 + 1.0) / (tf + params.k1 * norm)
    }

    /// BM25 score of one document for a query. Terms absent from the document
    /// or the corpus contribute 0; duplicate query terms are weighted by
    /// their multiplicity.
    pub fn score(
        &self,
        query: &NormalizedDocument,
        doc: &DocId,
        params: &Bm25Params,
    ) -> Result<f64> {
        let doc_idx = self.doc_index(doc).ok_or_else(|| Error::UnknownDoc {
            label: doc.label.clone(),
        })? as u32;
        let mut score = 0.0;
        for (term, qtf) in distinct_terms(query) {
            let Some(list) = self.postings.get(term) else {
                continue;
            };
            let Ok(pos) = list.binary_search_by_key(&doc_idx, |p| p.doc) else {
                continue;
            };
            let tf_part = self.tf_norm(list[pos].tf, self.doc_len[doc_idx as usize], params);
            score += qtf as f64 * self.idf(term) * tf_part;
        }
        Ok(score)
    }

    /// Ranks documents for a query: every document with a positive score,
    /// sorted score-descending with ties broken by label ascending, truncated
    /// to `cutoff`. With `fill_to_cutoff`, zero-score documents are appended
    /// in id order until the cutoff is reached.
    pub fn rank(
        &self,
        query: &NormalizedDocument,
        params: &Bm25Params,
        cutoff: usize,
        fill_to_cutoff: bool,
    ) -> Result<Vec<ScoredDoc>> {
        if cutoff == 0 {
            return Err(Error::ZeroCutoff);
        }
        let mut scores = vec![0.0f64; self.docs.len()];
        for (term, qtf) in distinct_terms(query) {
            let Some(list) = self.postings.get(term) else {
                continue;
            };
            let weight = qtf as f64 * self.idf(term);
            for posting in list {
                scores[posting.doc as usize] +=
                    weight * self.tf_norm(posting.tf, self.doc_len[posting.doc as usize], params);
            }
        }
        let mut ranked: Vec<(u32, f64)> = scores
            .iter()
            .enumerate()
            .filter(|(_, s)| **s > 0.0)
            .map(|(i, s)| (i as u32, *s))
            .collect();
        ranked.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .expect("BM25 scores are finite")
                .then_with(|| self.docs[a.0 as usize].cmp(&self.docs[b.0 as usize]))
        });
        ranked.truncate(cutoff);
        if fill_to_cutoff && ranked.len() < cutoff {
            for (i, s) in scores.iter().enumerate() {
                if *s == 0.0 {
                    ranked.push((i as u32, 0.0));
                    if ranked.len() == cutoff {
                        break;
                    }
                }
            }
        }
        Ok(ranked
            .into_iter()
            .map(|(i, score)| ScoredDoc {
                doc: self.docs[i as usize].clone(),
                score,
            })
            .collect())
    }

    /// Serializes to the length-prefixed little-endian layout with a trailing
    /// fnv1a-64 checksum.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        buf.extend_from_slice(INDEX_MAGIC);
        buf.push(FORMAT_VERSION);
        write_u64(&mut buf, self.docs.len() as u64);
        for (doc, len) in self.docs.iter().zip(&self.doc_len) {
            buf.push(kind_tag(doc.kind));
            write_str(&mut buf, &doc.label);
            write_u64(&mut buf, *len);
        }
        buf.extend_from_slice(&self.avgdl.to_le_bytes());
        write_u64(&mut buf, self.postings.len() as u64);
        for (term, list) in &self.postings {
            write_str(&mut buf, term);
            write_u64(&mut buf, list.len() as u64);
            for posting in list {
                buf.extend_from_slice(&posting.doc.to_le_bytes());
                buf.extend_from_slice(&posting.tf.to_le_bytes());
            }
        }
        let checksum = fnv1a64(&buf);
        write_u64(&mut buf, checksum);
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let payload = check_envelope(bytes, INDEX_MAGIC)?;
        let mut r = Reader::new(payload);
        let n_docs = r.u64()? as usize;
        let mut docs = Vec::with_capacity(n_docs);
        let mut doc_len = Vec::with_capacity(n_docs);
        for _ in 0..n_docs {
            let kind = kind_from_tag(r.u8()?)?;
            let label = r.string()?;
            docs.push(DocId::new(kind, label));
            doc_len.push(r.u64()?);
        }
        let avgdl = f64::from_le_bytes(r.bytes(8)?.try_into().expect("8 bytes"));
        let n_terms = r.u64()? as usize;
        let mut postings = BTreeMap::new();
        for _ in 0..n_terms {
            let term = r.string()?;
            let n = r.u64()? as usize;
            let mut list = Vec::with_capacity(n);
            for _ in 0..n {
                let doc = r.u32()?;
                let tf = r.u32()?;
                list.push(Posting { doc, tf });
            }
            postings.insert(term, list);
        }
        r.finish()?;
        Ok(Self {
            docs,
            doc_len,
            avgdl,
            postings,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_bytes(&bytes)
    }
}

/// Distinct query terms with multiplicities, in first-occurrence order.
fn distinct_terms(query: &NormalizedDocument) -> Vec<(&str, u32)> {
    let mut order: Vec<(&str, u32)> = Vec::new();
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for term in &query.terms {
        match seen.get(term.as_str()) {
            Some(&i) => order[i].1 += 1,
            None => {
                seen.insert(term, order.len());
                order.push((term, 1));
            }
        }
    }
    order
}

pub(crate) const FORMAT_VERSION: u8 = 1;
const INDEX_MAGIC: &[u8; 4] = b"LXIX";

pub(crate) fn kind_tag(kind: DocKind) -> u8 {
    match kind {
        DocKind::Case => 0,
        DocKind::Statute => 1,
        DocKind::Query => 2,
    }
}

pub(crate) fn kind_from_tag(tag: u8) -> Result<DocKind> {
    match tag {
        0 => Ok(DocKind::Case),
        1 => Ok(DocKind::Statute),
        2 => Ok(DocKind::Query),
        other => Err(Error::Format {
            message: format!("unknown document kind tag {other}"),
        }),
    }
}

pub(crate) fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

pub(crate) fn write_u64(buf: &mut Vec<u8>, v: u64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

pub(crate) fn write_str(buf: &mut Vec<u8>, s: &str) {
    buf.extend_from_slice(&(s.len() as u32).to_le_bytes());
    buf.extend_from_slice(s.as_bytes());
}

/// Validates magic, version, and trailing checksum; returns the payload
/// between the header and the checksum.
pub(crate) fn check_envelope<'a>(bytes: &'a [u8], magic: &[u8; 4]) -> Result<&'a [u8]> {
    if bytes.len() >= 4 && &bytes[..4] != magic {
        return Err(Error::Format {
            message: "bad magic number".into(),
        });
    }
    if bytes.len() >= 5 && bytes[4] != FORMAT_VERSION {
        return Err(Error::VersionMismatch { found: bytes[4] });
    }
    if bytes.len() < 13 {
        return Err(Error::ChecksumMismatch);
    }
    let (payload, trailer) = bytes.split_at(bytes.len() - 8);
    let stored = u64::from_le_bytes(trailer.try_into().expect("8 bytes"));
    if fnv1a64(payload) != stored {
        return Err(Error::ChecksumMismatch);
    }
    Ok(&payload[5..])
}

/// Sequential little-endian reader over a checked payload.
pub(crate) struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    pub(crate) fn bytes(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Format {
                message: "unexpected end of payload".into(),
            });
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub(crate) fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes(1)?[0])
    }

    pub(crate) fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes(4)?.try_into().expect("4 bytes")))
    }

    pub(crate) fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes(8)?.try_into().expect("8 bytes")))
    }

    pub(crate) fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes(8)?.try_into().expect("8 bytes")))
    }

    pub(crate) fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        let bytes = self.bytes(len)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| Error::Format {
            message: "string field is not valid UTF-8".into(),
        })
    }

    pub(crate) fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::Format {
                message: "trailing bytes after payload".into(),
            });
        }
        Ok(())
    }
}
