//! Retrieval evaluation: Prec@10, mean average precision, bpref, and mean
//! reciprocal rank, computed from a ranked run against relevance judgments.
//!
//! Bpref follows the standard trec_eval formulation,
//! `(1/R) * sum over relevant retrieved r of 1 - min(nonrel above r, R) / min(R, N)`,
//! where unjudged documents in the ranking are ignored entirely.

mod files;

pub use files::{parse_qrels, parse_run, write_run};

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::bm25::ScoredDoc;
use crate::error::{Error, Result};

/// Relevance judgments for one query: doc label -> graded relevance, where 0
/// is judged nonrelevant and >= 1 relevant.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueryJudgments {
    map: BTreeMap<String, u32>,
}

impl QueryJudgments {
    pub fn relevance(&self, doc: &str) -> Option<u32> {
        self.map.get(doc).copied()
    }

    pub fn is_relevant(&self, doc: &str) -> bool {
        self.relevance(doc).is_some_and(|r| r >= 1)
    }

    /// R: the number of judged-relevant documents.
    pub fn relevant_count(&self) -> usize {
        self.map.values().filter(|r| **r >= 1).count()
    }

    /// N: the number of judged-nonrelevant documents.
    pub fn nonrelevant_count(&self) -> usize {
        self.map.values().filter(|r| **r == 0).count()
    }
}

/// Relevance judgments keyed by (query, document), with per-query views.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Qrels {
    queries: BTreeMap<String, QueryJudgments>,
}

impl Qrels {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts one judgment; duplicate (query, doc) pairs are an error.
    pub fn insert(&mut self, query: &str, doc: &str, relevance: u32) -> Result<()> {
        let prev = self
            .queries
            .entry(query.to_string())
            .or_default()
            .map
            .insert(doc.to_string(), relevance);
        if prev.is_some() {
            return Err(Error::Format {
                message: format!("duplicate judgment for ({query}, {doc})"),
            });
        }
        Ok(())
    }

    pub fn query(&self, label: &str) -> Option<&QueryJudgments> {
        self.queries.get(label)
    }

    pub fn queries(&self) -> impl Iterator<Item = (&String, &QueryJudgments)> {
        self.queries.iter()
    }

    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }
}

/// One line of a run: a retrieved document with its score and 1-based rank.
#[derive(Debug, Clone, PartialEq)]
pub struct RunEntry {
    pub doc: String,
    pub score: f64,
    pub rank: u32,
}

/// A system's ranked output per query, carrying its run tag.
///
/// Scores are quantized to six decimal places on construction so that the
/// run-file exchange format round-trips structurally.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedRun {
    tag: String,
    queries: BTreeMap<String, Vec<RunEntry>>,
}

impl RankedRun {
    pub fn new(tag: impl Into<String>) -> Self {
        Self {
            tag: tag.into(),
            queries: BTreeMap::new(),
        }
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    /// Adds a query's ranking, assigning ranks 1..n in the given order.
    /// Document labels must be unique within the query.
    pub fn add_ranking(&mut self, query: &str, scored: &[ScoredDoc]) -> Result<()> {
        if self.queries.contains_key(query) {
            return Err(Error::Format {
                message: format!("duplicate query in run: {query}"),
            });
        }
        let mut entries = Vec::with_capacity(scored.len());
        let mut seen = std::collections::BTreeSet::new();
        for (i, s) in scored.iter().enumerate() {
            if !seen.insert(s.doc.label.clone()) {
                return Err(Error::Format {
                    message: format!("duplicate document {} in query {query}", s.doc.label),
                });
            }
            entries.push(RunEntry {
                doc: s.doc.label.clone(),
                score: quantize_score(s.score),
                rank: (i + 1) as u32,
            });
        }
        self.queries.insert(query.to_string(), entries);
        Ok(())
    }

    pub(crate) fn insert_entries(&mut self, query: String, entries: Vec<RunEntry>) {
        self.queries.insert(query, entries);
    }

    pub fn ranking(&self, query: &str) -> Option<&[RunEntry]> {
        self.queries.get(query).map(Vec::as_slice)
    }

    pub fn queries(&self) -> impl Iterator<Item = (&String, &Vec<RunEntry>)> {
        self.queries.iter()
    }

    pub fn query_count(&self) -> usize {
        self.queries.len()
    }
}

/// Rounds a score to the six decimal places the run-file format carries.
pub(crate) fn quantize_score(score: f64) -> f64 {
    (score * 1e6).round() / 1e6
}

/// Fraction of the first `k` entries that are judged relevant; rankings
/// shorter than `k` count as padded with nonrelevant documents.
pub fn precision_at_k(ranking: &[RunEntry], judgments: &QueryJudgments, k: usize) -> f64 {
    debug_assert!(k >= 1);
    if k == 0 {
        return 0.0;
    }
    let hits = ranking
        .iter()
        .take(k)
        .filter(|e| judgments.is_relevant(&e.doc))
        .count();
    hits as f64 / k as f64
}

/// Mean of precision at each relevant retrieved position, normalized by R.
pub fn average_precision(ranking: &[RunEntry], judgments: &QueryJudgments) -> f64 {
    let r = judgments.relevant_count();
    if r == 0 {
        return 0.0;
    }
    let mut relevant_so_far = 0usize;
    let mut sum = 0.0;
    for (i, entry) in ranking.iter().enumerate() {
        if judgments.is_relevant(&entry.doc) {
            relevant_so_far += 1;
            sum += relevant_so_far as f64 / (i + 1) as f64;
        }
    }
    sum / r as f64
}

/// Binary preference. Unjudged documents in the ranking are ignored; with no
/// judged-nonrelevant documents the score degenerates to recall.
pub fn bpref(ranking: &[RunEntry], judgments: &QueryJudgments) -> f64 {
    let r = judgments.relevant_count();
    if r == 0 {
        return 0.0;
    }
    let n = judgments.nonrelevant_count();
    if n == 0 {
        let retrieved_relevant = ranking
            .iter()
            .filter(|e| judgments.is_relevant(&e.doc))
            .count();
        return retrieved_relevant as f64 / r as f64;
    }
    let denom = r.min(n) as f64;
    let mut nonrel_above = 0usize;
    let mut sum = 0.0;
    for entry in ranking {
        match judgments.relevance(&entry.doc) {
            Some(rel) if rel >= 1 => {
                sum += 1.0 - nonrel_above.min(r) as f64 / denom;
            }
            Some(_) => nonrel_above += 1,
            None => {}
        }
    }
    sum / r as f64
}

/// Reciprocal of the rank of the first judged-relevant entry; 0 if none.
pub fn reciprocal_rank(ranking: &[RunEntry], judgments: &QueryJudgments) -> f64 {
    ranking
        .iter()
        .position(|e| judgments.is_relevant(&e.doc))
        .map_or(0.0, |i| 1.0 / (i + 1) as f64)
}

/// All four metrics for one query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryMetrics {
    pub precision_at_10: f64,
    pub average_precision: f64,
    pub bpref: f64,
    pub reciprocal_rank: f64,
}

/// Per-query metric values plus their arithmetic means.
///
/// Queries are evaluated when they appear in the qrels with at least one
/// relevant document; such queries missing from the run score 0 everywhere.
/// Queries judged entirely nonrelevant are skipped and listed.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub run_tag: String,
    pub per_query: BTreeMap<String, QueryMetrics>,
    pub skipped: Vec<String>,
    pub means: QueryMetrics,
}

/// Scores a run against judgments. Errors when the run and qrels share no
/// query label.
pub fn evaluate_run(run: &RankedRun, qrels: &Qrels) -> Result<MetricsReport> {
    if !qrels.queries().any(|(label, _)| run.ranking(label).is_some()) {
        return Err(Error::NoOverlappingQueries);
    }
    let empty: Vec<RunEntry> = Vec::new();
    let mut per_query = BTreeMap::new();
    let mut skipped = Vec::new();
    for (label, judgments) in qrels.queries() {
        if judgments.relevant_count() == 0 {
            skipped.push(label.clone());
            continue;
        }
        let ranking = run.ranking(label).unwrap_or(&empty);
        per_query.insert(
            label.clone(),
            QueryMetrics {
                precision_at_10: precision_at_k(ranking, judgments, 10),
                average_precision: average_precision(ranking, judgments),
                bpref: bpref(ranking, judgments),
                reciprocal_rank: reciprocal_rank(ranking, judgments),
            },
        );
    }
    let count = per_query.len().max(1) as f64;
    let means = QueryMetrics {
        precision_at_10: per_query.values().map(|m| m.precision_at_10).sum::<f64>() / count,
        average_precision: per_query
            .values()
            .map(|m| m.average_precision)
            .sum::<f64>()
            / count,
        bpref: per_query.values().map(|m| m.bpref).sum::<f64>() / count,
        reciprocal_rank: per_query.values().map(|m| m.reciprocal_rank).sum::<f64>() / count,
    };
    Ok(MetricsReport {
        run_tag: run.tag().to_string(),
        per_query,
        skipped,
        means,
    })
}

impl MetricsReport {
    /// Human-readable table.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "run: {}", self.run_tag);
        let _ = writeln!(
            out,
            "{:<12} {:>8} {:>8} {:>8} {:>8}",
            "query", "P@10", "AP", "bpref", "RR"
        );
        for (label, m) in &self.per_query {
            let _ = writeln!(
                out,
                "{:<12} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
                label, m.precision_at_10, m.average_precision, m.bpref, m.reciprocal_rank
            );
        }
        let _ = writeln!(
            out,
            "{:<12} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            "mean",
            self.means.precision_at_10,
            self.means.average_precision,
            self.means.bpref,
            self.means.reciprocal_rank
        );
        for label in &self.skipped {
            let _ = writeln!(out, "skipped (no relevant documents): {label}");
        }
        out
    }

    /// Machine-readable lines: `metric<TAB>query<TAB>value`, with query `all`
    /// for the means.
    pub fn to_machine(&self) -> String {
        let mut out = String::new();
        let mut emit = |metric: &str, query: &str, value: f64| {
            let _ = writeln!(out, "{metric}\t{query}\t{value:.6}");
        };
        for (label, m) in &self.per_query {
            emit("p_10", label, m.precision_at_10);
            emit("map", label, m.average_precision);
            emit("bpref", label, m.bpref);
            emit("recip_rank", label, m.reciprocal_rank);
        }
        emit("p_10", "all", self.means.precision_at_10);
        emit("map", "all", self.means.average_precision);
        emit("bpref", "all", self.means.bpref);
        emit("recip_rank", "all", self.means.reciprocal_rank);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    pub(crate) fn entries(docs: &[&str]) -> Vec<RunEntry> {
        docs.iter()
            .enumerate()
            .map(|(i, d)| RunEntry {
                doc: d.to_string(),
                score: 1.0 - i as f64 * 0.01,
                rank: (i + 1) as u32,
            })
            .collect()
    }

    fn judge(pairs: &[(&str, u32)]) -> QueryJudgments {
        let mut q = Qrels::new();
        for (doc, rel) in pairs {
            q.insert("Q", doc, *rel).unwrap();
        }
        q.query("Q").unwrap().clone()
    }

    #[test]
    fn precision_fixture() {
        // 2 relevant docs in the top 10.
        let j = judge(&[("d1", 1), ("d5", 1)]);
        let ranking = entries(&["d1", "x1", "x2", "x3", "d5", "x4", "x5", "x6", "x7", "x8"]);
        assert_eq!(precision_at_k(&ranking, &j, 10), 0.2);
        assert_eq!(precision_at_k(&[], &j, 10), 0.0);
        // Short ranking is padded with nonrelevant.
        assert_eq!(precision_at_k(&entries(&["d1"]), &j, 10), 0.1);
    }

    #[test]
    fn average_precision_fixture() {
        let j = judge(&[("r1", 1), ("r2", 1)]);
        let ranking = entries(&["r1", "n1", "r2"]);
        assert_relative_eq!(
            average_precision(&ranking, &j),
            5.0 / 6.0,
            epsilon = 1e-12
        );
        assert_eq!(average_precision(&entries(&["n1", "n2"]), &j), 0.0);
        // All relevant at the top ranks.
        assert_eq!(average_precision(&entries(&["r1", "r2"]), &j), 1.0);
    }

    #[test]
    fn bpref_fixture() {
        let j = judge(&[("r1", 1), ("r2", 1), ("n1", 0), ("n2", 0)]);
        let ranking = entries(&["r1", "n1", "r2", "n2"]);
        assert_relative_eq!(bpref(&ranking, &j), 0.75, epsilon = 1e-12);
        // All relevant above all judged nonrelevant.
        assert_eq!(bpref(&entries(&["r1", "r2", "n1", "n2"]), &j), 1.0);
        // Unjudged docs are ignored entirely.
        let with_unjudged = entries(&["r1", "u1", "u2", "n1", "r2", "n2"]);
        assert_relative_eq!(bpref(&with_unjudged, &j), 0.75, epsilon = 1e-12);
    }

    #[test]
    fn bpref_without_judged_nonrelevant_is_recall() {
        let j = judge(&[("r1", 1), ("r2", 1)]);
        assert_eq!(bpref(&entries(&["r1", "x"]), &j), 0.5);
        assert_eq!(bpref(&entries(&["r1", "r2"]), &j), 1.0);
    }

    #[test]
    fn reciprocal_rank_fixture() {
        let j = judge(&[("r1", 1)]);
        assert_eq!(reciprocal_rank(&entries(&["a", "b", "c", "r1"]), &j), 0.25);
        assert_eq!(reciprocal_rank(&entries(&["a", "b"]), &j), 0.0);
        assert_eq!(reciprocal_rank(&entries(&["r1"]), &j), 1.0);
    }

    #[test]
    fn evaluate_perfect_run() {
        let mut qrels = Qrels::new();
        qrels.insert("Q1", "d1", 1).unwrap();
        qrels.insert("Q1", "d2", 1).unwrap();
        qrels.insert("Q1", "d3", 0).unwrap();
        qrels.insert("Q2", "e1", 1).unwrap();
        let mut run = RankedRun::new("perfect");
        run.insert_entries("Q1".into(), entries(&["d1", "d2", "d3"]));
        run.insert_entries("Q2".into(), entries(&["e1"]));
        let report = evaluate_run(&run, &qrels).unwrap();
        assert_eq!(report.means.average_precision, 1.0);
        assert_eq!(report.means.bpref, 1.0);
        assert_eq!(report.means.reciprocal_rank, 1.0);
        // P@10 is capped by R/10 here.
        assert_relative_eq!(report.means.precision_at_10, 0.15, epsilon = 1e-12);
    }

    #[test]
    fn evaluate_empty_run_scores_zero() {
        let mut qrels = Qrels::new();
        qrels.insert("Q1", "d1", 1).unwrap();
        qrels.insert("Q2", "d2", 1).unwrap();
        let mut run = RankedRun::new("empty");
        run.insert_entries("Q1".into(), vec![]);
        let report = evaluate_run(&run, &qrels).unwrap();
        assert_eq!(report.per_query.len(), 2);
        assert_eq!(report.means.average_precision, 0.0);
        assert_eq!(report.means.precision_at_10, 0.0);
        assert_eq!(report.means.bpref, 0.0);
        assert_eq!(report.means.reciprocal_rank, 0.0);
    }

    #[test]
    fn evaluate_requires_overlap() {
        let mut qrels = Qrels::new();
        qrels.insert("Q1", "d1", 1).unwrap();
        let mut run = RankedRun::new("other");
        run.insert_entries("Q9".into(), entries(&["d1"]));
        assert!(matches!(
            evaluate_run(&run, &qrels),
            Err(Error::NoOverlappingQueries)
        ));
    }

    #[test]
    fn queries_without_relevant_docs_are_skipped() {
        let mut qrels = Qrels::new();
        qrels.insert("Q1", "d1", 1).unwrap();
        qrels.insert("Q2", "d2", 0).unwrap();
        let mut run = RankedRun::new("t");
        run.insert_entries("Q1".into(), entries(&["d1"]));
        run.insert_entries("Q2".into(), entries(&["d2"]));
        let report = evaluate_run(&run, &qrels).unwrap();
        assert_eq!(report.per_query.len(), 1);
        assert_eq!(report.skipped, vec!["Q2".to_string()]);
        assert_eq!(report.means.average_precision, 1.0);
    }

    #[test]
    fn machine_output_format() {
        let mut qrels = Qrels::new();
        qrels.insert("Q1", "d1", 1).unwrap();
        let mut run = RankedRun::new("t");
        run.insert_entries("Q1".into(), entries(&["d1"]));
        let report = evaluate_run(&run, &qrels).unwrap();
        let machine = report.to_machine();
        assert!(machine.contains("map\tall\t1.000000"));
        assert!(machine.contains("map\tQ1\t1.000000"));
        assert!(machine.contains("bpref\tall\t"));
        let table = report.to_table();
        assert!(table.contains("mean"));
    }

    #[test]
    fn duplicate_judgment_rejected() {
        let mut qrels = Qrels::new();
        qrels.insert("Q1", "d1", 1).unwrap();
        assert!(qrels.insert("Q1", "d1", 0).is_err());
    }

    #[test]
    fn permuting_below_last_relevant_is_invariant() {
        let j = judge(&[("r1", 1), ("r2", 1), ("n1", 0)]);
        let a = entries(&["r1", "n1", "r2", "x1", "x2", "x3"]);
        let b = entries(&["r1", "n1", "r2", "x3", "x1", "x2"]);
        assert_eq!(average_precision(&a, &j), average_precision(&b, &j));
        assert_eq!(bpref(&a, &j), bpref(&b, &j));
        assert_eq!(reciprocal_rank(&a, &j), reciprocal_rank(&b, &j));
    }

    /// Brute-force bpref: rescans the ranking prefix for every relevant
    /// retrieved document.
    fn bpref_enumeration_oracle(ranking: &[RunEntry], j: &QueryJudgments) -> f64 {
        let r = j.relevant_count();
        if r == 0 {
            return 0.0;
        }
        let n = j.nonrelevant_count();
        if n == 0 {
            return ranking.iter().filter(|e| j.is_relevant(&e.doc)).count() as f64 / r as f64;
        }
        let mut total = 0.0;
        for (i, entry) in ranking.iter().enumerate() {
            if j.is_relevant(&entry.doc) {
                let above = ranking[..i]
                    .iter()
                    .filter(|e| j.relevance(&e.doc) == Some(0))
                    .count();
                total += 1.0 - above.min(r) as f64 / r.min(n) as f64;
            }
        }
        total / r as f64
    }

    fn judgments_from(rels: &[u32]) -> QueryJudgments {
        let mut qrels = Qrels::new();
        for (i, r) in rels.iter().enumerate() {
            qrels.insert("Q", &format!("d{i}"), *r).unwrap();
        }
        qrels.query("Q").unwrap().clone()
    }

    /// Unique doc labels in first-occurrence order.
    fn ranking_from(order: &[usize]) -> Vec<RunEntry> {
        let mut seen = std::collections::BTreeSet::new();
        let docs: Vec<String> = order
            .iter()
            .map(|i| format!("d{i}"))
            .filter(|d| seen.insert(d.clone()))
            .collect();
        entries(&docs.iter().map(String::as_str).collect::<Vec<_>>())
    }

    proptest! {
        #[test]
        fn metrics_stay_in_unit_interval(
            rels in proptest::collection::vec(0u32..2, 1..10),
            order in proptest::collection::vec(0usize..10, 0..10),
        ) {
            let j = judgments_from(&rels);
            let ranking = ranking_from(&order);
            for value in [
                precision_at_k(&ranking, &j, 10),
                average_precision(&ranking, &j),
                bpref(&ranking, &j),
                reciprocal_rank(&ranking, &j),
            ] {
                prop_assert!((0.0..=1.0).contains(&value), "out of range: {}", value);
            }
        }

        #[test]
        fn bpref_matches_enumeration_oracle(
            rels in proptest::collection::vec(0u32..2, 1..10),
            order in proptest::collection::vec(0usize..10, 0..10),
        ) {
            let j = judgments_from(&rels);
            let ranking = ranking_from(&order);
            let got = bpref(&ranking, &j);
            let want = bpref_enumeration_oracle(&ranking, &j);
            prop_assert!((got - want).abs() < 1e-12, "{} vs {}", got, want);
        }
    }
}
