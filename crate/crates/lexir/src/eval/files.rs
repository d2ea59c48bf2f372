//! TREC-style exchange formats.
//!
//! Qrels: `query_label iteration doc_label relevance` (iteration ignored).
//! Runs:  `query_label Q0 doc_label rank score run_tag`, scores printed with
//! six decimal places, ranks consecutive from 1, scores non-increasing.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{quantize_score, Qrels, RankedRun, RunEntry};
use crate::error::{Error, Result};
use crate::text::read_utf8;

/// Parses a qrels file. Malformed lines are reported with their number;
/// duplicate (query, doc) pairs are rejected.
pub fn parse_qrels(path: &Path) -> Result<Qrels> {
    let text = read_utf8(path)?;
    let mut qrels = Qrels::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let malformed = |message: String| Error::MalformedLine {
            path: path.to_path_buf(),
            line: idx + 1,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [query, _iteration, doc, relevance] = fields[..] else {
            return Err(malformed(format!(
                "expected 4 whitespace-separated fields, found {}",
                fields.len()
            )));
        };
        let relevance: u32 = relevance
            .parse()
            .map_err(|_| malformed(format!("relevance is not a nonnegative integer: {relevance}")))?;
        qrels
            .insert(query, doc, relevance)
            .map_err(|e| malformed(e.to_string()))?;
    }
    Ok(qrels)
}

/// Writes a run in the six-column format.
pub fn write_run(run: &RankedRun, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    for (query, entries) in run.queries() {
        for entry in entries {
            writeln!(
                buf,
                "{} Q0 {} {} {:.6} {}",
                query,
                entry.doc,
                entry.rank,
                entry.score,
                run.tag()
            )
            .expect("writing to a Vec cannot fail");
        }
    }
    fs::write(path, buf).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses a run file, validating the column format, rank consecutiveness,
/// score monotonicity, and uniqueness of (query, doc) pairs.
pub fn parse_run(path: &Path) -> Result<RankedRun> {
    let text = read_utf8(path)?;
    let mut tag: Option<String> = None;
    let mut queries: std::collections::BTreeMap<String, Vec<RunEntry>> =
        std::collections::BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let malformed = |message: String| Error::MalformedLine {
            path: path.to_path_buf(),
            line: idx + 1,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [query, _q0, doc, rank, score, line_tag] = fields[..] else {
            return Err(malformed(format!(
                "expected 6 whitespace-separated fields, found {}",
                fields.len()
            )));
        };
        let rank: u32 = rank
            .parse()
            .map_err(|_| malformed(format!("rank is not an integer: {rank}")))?;
        if rank == 0 {
            return Err(malformed("rank must start at 1".into()));
        }
        let score: f64 = score
            .parse()
            .map_err(|_| malformed(format!("score is not a number: {score}")))?;
        match &tag {
            None => tag = Some(line_tag.to_string()),
            Some(t) if t != line_tag => {
                return Err(malformed(format!(
                    "run tag changed from {t} to {line_tag}"
                )))
            }
            _ => {}
        }
        let entries = queries.entry(query.to_string()).or_default();
        if entries.iter().any(|e| e.doc == doc) {
            return Err(malformed(format!("duplicate document {doc} for {query}")));
        }
        entries.push(RunEntry {
            doc: doc.to_string(),
            score: quantize_score(score),
            rank,
        });
    }

    let mut run = RankedRun::new(tag.unwrap_or_else(|| "run".to_string()));
    for (query, mut entries) in queries {
        entries.sort_by_key(|e| e.rank);
        for (i, entry) in entries.iter().enumerate() {
            if entry.rank != (i + 1) as u32 {
                return Err(Error::Format {
                    message: format!(
                        "ranks for query {query} are not consecutive from 1 (found {} at position {})",
                        entry.rank,
                        i + 1
                    ),
                });
            }
            if i > 0 && entries[i - 1].score < entry.score {
                return Err(Error::Format {
                    message: format!("scores increase with rank for query {query}"),
                });
            }
        }
        run.insert_entries(query, entries);
    }
    Ok(run)
}
