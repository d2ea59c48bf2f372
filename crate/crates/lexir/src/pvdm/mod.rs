//! Distributed-memory paragraph vectors (PV-DM) with negative sampling,
//! trained from scratch.
//!
//! A paragraph vector is concatenated with the vectors of the `window`
//! preceding words (null-padded at document start) and the concatenation
//! predicts the next word through a logistic output layer. Word vectors are
//! shared across paragraphs; paragraph vectors are unique. Training is
//! single-threaded and deterministic for a fixed seed; trained models are
//! immutable and safe to share across threads.

mod io;
mod train;

pub use train::{train, InferParams, TrainStats};

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::bm25::ScoredDoc;
use crate::corpus::{Corpus, DocId};
use crate::error::{Error, Result};
use crate::text::NormalizedDocument;

/// The distinguished padding token occupying vocabulary position 0. It can
/// never collide with corpus terms (the tokenizer strips control characters),
/// is never updated during training, and is never drawn as a negative.
pub const NULL_TOKEN: &str = "\0";

/// Frequency-filtered vocabulary with a stable ordering: the null token
/// first, then terms by descending corpus frequency, ties broken by token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
    min_count: u64,
}

impl Vocabulary {
    /// Counts corpus terms and keeps those with frequency >= `min_count`.
    pub fn build(corpus: &Corpus, min_count: u64) -> Result<Self> {
        let mut freq: HashMap<&str, u64> = HashMap::new();
        for doc in corpus.documents() {
            for term in &doc.terms {
                *freq.entry(term.as_str()).or_insert(0) += 1;
            }
        }
        let mut kept: Vec<(&str, u64)> = freq
            .into_iter()
            .filter(|(_, count)| *count >= min_count)
            .collect();
        if kept.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

        let mut terms = Vec::with_capacity(kept.len() + 1);
        let mut counts = Vec::with_capacity(kept.len() + 1);
        terms.push(NULL_TOKEN.to_string());
        counts.push(0);
        for (term, count) in kept {
            terms.push(term.to_string());
            counts.push(count);
        }
        Ok(Self::from_parts(terms, counts, min_count))
    }

    pub(crate) fn from_parts(terms: Vec<String>, counts: Vec<u64>, min_count: u64) -> Self {
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Self {
            terms,
            counts,
            index,
            min_count,
        }
    }

    /// Vocabulary size including the null token.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, index: usize) -> &str {
        &self.terms[index]
    }

    pub fn count(&self, index: usize) -> u64 {
        self.counts[index]
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub(crate) fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Maps a document's terms to vocabulary indices, dropping
    /// out-of-vocabulary terms. The null token never appears in real
    /// documents and is excluded regardless.
    pub fn doc_indices(&self, doc: &NormalizedDocument) -> Vec<usize> {
        doc.terms
            .iter()
            .filter_map(|t| self.index_of(t))
            .filter(|&i| i != 0)
            .collect()
    }
}

/// PV-DM hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PvDmConfig {
    /// Vector dimension for both word and paragraph embeddings.
    pub dim: usize,
    /// Number of preceding context tokens.
    pub window: usize,
    pub epochs: usize,
    /// Initial learning rate, decayed linearly to 1e-4 across training.
    pub learning_rate: f64,
    /// Negative samples per training example.
    pub negatives: usize,
    /// Minimum corpus frequency for a vocabulary term.
    pub min_count: u64,
    pub seed: u64,
}

impl Default for PvDmConfig {
    fn default() -> Self {
        Self {
            dim: 150,
            window: 20,
            epochs: 50,
            learning_rate: 0.025,
            negatives: 5,
            min_count: 2,
            seed: 1,
        }
    }
}

impl PvDmConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |message: &str| Error::InvalidParams {
            message: message.to_string(),
        };
        if self.dim == 0 {
            return Err(bad("dim must be positive"));
        }
        if self.window == 0 {
            return Err(bad("window must be positive"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(bad("learning_rate must be positive and finite"));
        }
        if self.negatives == 0 {
            return Err(bad("negatives must be positive"));
        }
        if self.min_count == 0 {
            return Err(bad("min_count must be positive"));
        }
        Ok(())
    }

    /// Width of the concatenated input layer.
    pub fn input_width(&self) -> usize {
        self.dim * (self.window + 1)
    }
}

/// One prediction task: the `window` token indices preceding `target`
/// (null-padded on the left, oldest first) plus the paragraph they came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingExample {
    pub paragraph: usize,
    pub context: Vec<usize>,
    pub target: usize,
}

/// Builds the training examples for one document: one example per
/// in-vocabulary position, in document order. Out-of-vocabulary terms are
/// dropped before positions are formed.
pub fn make_examples(
    doc: &NormalizedDocument,
    paragraph: usize,
    window: usize,
    vocab: &Vocabulary,
) -> Vec<TrainingExample> {
    let seq = vocab.doc_indices(doc);
    (0..seq.len())
        .map(|t| TrainingExample {
            paragraph,
            context: context_at(&seq, t, window),
            target: seq[t],
        })
        .collect()
}

pub(crate) fn context_at(seq: &[usize], t: usize, window: usize) -> Vec<usize> {
    let mut context = Vec::with_capacity(window);
    context_into(seq, t, window, &mut context);
    context
}

pub(crate) fn context_into(seq: &[usize], t: usize, window: usize, out: &mut Vec<usize>) {
    out.clear();
    out.extend((0..window).map(|j| {
        let offset = window - j;
        if t >= offset {
            seq[t - offset]
        } else {
            0
        }
    }));
}

/// Dense row-major matrix of parameters.
#[derive(Debug, Clone)]
pub(crate) struct Matrix {
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub(crate) fn from_data(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { cols, data }
    }

    fn uniform(rows: usize, cols: usize, half_range: f64, rng: &mut ChaCha8Rng) -> Self {
        let data = (0..rows * cols)
            .map(|_| rng.random_range(-half_range..half_range))
            .collect();
        Self { cols, data }
    }

    pub(crate) fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub(crate) fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub(crate) fn data(&self) -> &[f64] {
        &self.data
    }
}

/// A PV-DM model: shared word vectors, per-paragraph vectors, and the output
/// weight matrix over the concatenated input.
#[derive(Debug, Clone)]
pub struct PvDmModel {
    vocab: Vocabulary,
    paragraphs: Vec<DocId>,
    para_index: HashMap<DocId, usize>,
    word_vecs: Matrix,
    para_vecs: Matrix,
    out_weights: Matrix,
    config: PvDmConfig,
}

impl PvDmModel {
    /// Initializes a model: word and paragraph vectors i.i.d. uniform on
    /// (-0.5/dim, +0.5/dim) from the seeded generator (word rows first, then
    /// paragraph rows, row-major), output weights all zero.
    pub fn init(vocab: Vocabulary, paragraphs: Vec<DocId>, config: PvDmConfig) -> Self {
        let mut rng = rand::SeedableRng::seed_from_u64(config.seed);
        let half = 0.5 / config.dim as f64;
        let word_vecs = Matrix::uniform(vocab.len(), config.dim, half, &mut rng);
        let para_vecs = Matrix::uniform(paragraphs.len(), config.dim, half, &mut rng);
        let out_weights = Matrix::zeros(vocab.len(), config.input_width());
        let para_index = paragraphs
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();
        Self {
            vocab,
            paragraphs,
            para_index,
            word_vecs,
            para_vecs,
            out_weights,
            config,
        }
    }

    pub(crate) fn from_parts(
        vocab: Vocabulary,
        paragraphs: Vec<DocId>,
        word_vecs: Matrix,
        para_vecs: Matrix,
        out_weights: Matrix,
        config: PvDmConfig,
    ) -> Self {
        let para_index = paragraphs
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();
        Self {
            vocab,
            paragraphs,
            para_index,
            word_vecs,
            para_vecs,
            out_weights,
            config,
        }
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn config(&self) -> &PvDmConfig {
        &self.config
    }

    pub fn paragraphs(&self) -> &[DocId] {
        &self.paragraphs
    }

    pub fn word_vector(&self, index: usize) -> &[f64] {
        self.word_vecs.row(index)
    }

    pub fn paragraph_vector(&self, index: usize) -> &[f64] {
        self.para_vecs.row(index)
    }

    pub fn paragraph_vector_by_id(&self, id: &DocId) -> Option<&[f64]> {
        self.para_index.get(id).map(|&i| self.para_vecs.row(i))
    }

    pub fn out_weights_row(&self, word: usize) -> &[f64] {
        self.out_weights.row(word)
    }

    /// Mutable parameter access, exposed for perturbation-style diagnostics.
    pub fn word_vector_mut(&mut self, index: usize) -> &mut [f64] {
        self.word_vecs.row_mut(index)
    }

    pub fn paragraph_vector_mut(&mut self, index: usize) -> &mut [f64] {
        self.para_vecs.row_mut(index)
    }

    pub fn out_weights_row_mut(&mut self, word: usize) -> &mut [f64] {
        self.out_weights.row_mut(word)
    }

    /// The concatenated input vector for an example:
    /// [paragraph vector, context word vectors in order].
    pub fn input_vector(&self, example: &TrainingExample) -> Vec<f64> {
        let mut input = Vec::with_capacity(self.config.input_width());
        input.extend_from_slice(self.para_vecs.row(example.paragraph));
        for &w in &example.context {
            input.extend_from_slice(self.word_vecs.row(w));
        }
        input
    }

    /// Forward pass: the input concatenation and the score of every output
    /// word, `s_w = out_weights[w] . input`.
    pub fn forward(&self, example: &TrainingExample) -> (Vec<f64>, Vec<f64>) {
        let input = self.input_vector(example);
        let scores = (0..self.vocab.len())
            .map(|w| dot(self.out_weights.row(w), &input))
            .collect();
        (input, scores)
    }

    /// Negative-sampling loss for one example:
    /// `-ln sigma(s_target) - sum over negatives of ln sigma(-s_neg)`.
    pub fn ns_loss(&self, example: &TrainingExample, negatives: &[usize]) -> f64 {
        let input = self.input_vector(example);
        self.ns_loss_on_input(&input, example.target, negatives)
    }

    fn ns_loss_on_input(&self, input: &[f64], target: usize, negatives: &[usize]) -> f64 {
        let mut loss = softplus(-dot(self.out_weights.row(target), input));
        for &neg in negatives {
            loss += softplus(dot(self.out_weights.row(neg), input));
        }
        loss
    }

    /// One stochastic gradient step on an example, returning the loss before
    /// the update. Updates the output rows of the target and negatives, the
    /// paragraph vector, and the non-null context word vectors.
    pub fn sgd_step(
        &mut self,
        example: &TrainingExample,
        negatives: &[usize],
        lr: f64,
    ) -> f64 {
        let mut scratch = StepScratch::new(self.config.input_width());
        self.sgd_step_scratch(
            example.paragraph,
            &example.context,
            example.target,
            negatives,
            lr,
            &mut scratch,
        )
    }

    /// The step body, with caller-owned buffers so the training loop does not
    /// allocate per example. The arithmetic sequence is identical to
    /// [`Self::sgd_step`].
    pub(crate) fn sgd_step_scratch(
        &mut self,
        paragraph: usize,
        context: &[usize],
        target: usize,
        negatives: &[usize],
        lr: f64,
        scratch: &mut StepScratch,
    ) -> f64 {
        scratch.fill_input(self, paragraph, context);
        let input = &scratch.input;
        let width = input.len();
        let input_grad = &mut scratch.input_grad;
        input_grad.clear();
        input_grad.resize(width, 0.0);
        let mut loss = 0.0;

        // dL/ds is sigma(s) - label; input gradients use pre-update rows.
        scratch.row_grads.clear();
        for (word, label) in
            std::iter::once((target, 1.0)).chain(negatives.iter().map(|&n| (n, 0.0)))
        {
            let s = dot(self.out_weights.row(word), input);
            loss += if label > 0.5 {
                softplus(-s)
            } else {
                softplus(s)
            };
            let g = sigmoid(s) - label;
            let row = self.out_weights.row(word);
            for (gj, rj) in input_grad.iter_mut().zip(row) {
                *gj += g * rj;
            }
            scratch.row_grads.push((word, g));
        }
        for &(word, g) in &scratch.row_grads {
            let row = self.out_weights.row_mut(word);
            for (rj, xj) in row.iter_mut().zip(input) {
                *rj -= lr * g * xj;
            }
        }

        let dim = self.config.dim;
        let para = self.para_vecs.row_mut(paragraph);
        for (pj, gj) in para.iter_mut().zip(&input_grad[..dim]) {
            *pj -= lr * gj;
        }
        for (slot, &w) in context.iter().enumerate() {
            if w == 0 {
                continue;
            }
            let segment = &input_grad[(slot + 1) * dim..(slot + 2) * dim];
            let vec = self.word_vecs.row_mut(w);
            for (vj, gj) in vec.iter_mut().zip(segment) {
                *vj -= lr * gj;
            }
        }
        loss
    }

    /// Gradient step for paragraph inference: identical arithmetic to
    /// [`Self::sgd_step`], but only `para_vec` moves; word vectors and output
    /// weights stay frozen.
    pub(crate) fn inference_step(
        &self,
        para_vec: &mut [f64],
        context: &[usize],
        target: usize,
        negatives: &[usize],
        lr: f64,
        scratch: &mut StepScratch,
    ) {
        let dim = self.config.dim;
        scratch.input.clear();
        scratch.input.extend_from_slice(para_vec);
        for &w in context {
            scratch.input.extend_from_slice(self.word_vecs.row(w));
        }
        let input = &scratch.input;
        let grad = &mut scratch.input_grad;
        grad.clear();
        grad.resize(dim, 0.0);
        for (word, label) in
            std::iter::once((target, 1.0)).chain(negatives.iter().map(|&n| (n, 0.0)))
        {
            let row = self.out_weights.row(word);
            let g = sigmoid(dot(row, input)) - label;
            for (gj, rj) in grad.iter_mut().zip(&row[..dim]) {
                *gj += g * rj;
            }
        }
        for (pj, gj) in para_vec.iter_mut().zip(grad.iter()) {
            *pj -= lr * gj;
        }
    }
}

/// Reusable buffers for the per-example gradient step.
pub(crate) struct StepScratch {
    input: Vec<f64>,
    input_grad: Vec<f64>,
    row_grads: Vec<(usize, f64)>,
}

impl StepScratch {
    pub(crate) fn new(width: usize) -> Self {
        Self {
            input: Vec::with_capacity(width),
            input_grad: Vec::with_capacity(width),
            row_grads: Vec::new(),
        }
    }

    fn fill_input(&mut self, model: &PvDmModel, paragraph: usize, context: &[usize]) {
        self.input.clear();
        self.input.extend_from_slice(model.para_vecs.row(paragraph));
        for &w in context {
            self.input.extend_from_slice(model.word_vecs.row(w));
        }
    }
}

/// Dot product with four independent accumulators; the wide input
/// concatenations make a single serial float-add chain the bottleneck.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let split = a.len() - a.len() % 4;
    let mut acc = [0.0f64; 4];
    for (ca, cb) in a[..split].chunks_exact(4).zip(b[..split].chunks_exact(4)) {
        acc[0] += ca[0] * cb[0];
        acc[1] += ca[1] * cb[1];
        acc[2] += ca[2] * cb[2];
        acc[3] += ca[3] * cb[3];
    }
    let mut tail = 0.0;
    for (x, y) in a[split..].iter().zip(&b[split..]) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// ln(1 + e^x), stable for large |x|.
pub(crate) fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Cosine similarity of two equal-width non-zero vectors.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    debug_assert_eq!(u.len(), v.len());
    let nu = dot(u, u).sqrt();
    let nv = dot(v, v).sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(dot(u, v) / (nu * nv))
}

/// Ranks candidates by cosine similarity to the query vector, descending,
/// with ties broken by label ascending, truncated to `cutoff`. A zero-norm
/// vector on either side yields similarity -1 for that candidate.
pub fn rank_by_cosine<'a, I>(query: &[f64], candidates: I, cutoff: usize) -> Vec<ScoredDoc>
where
    I: IntoIterator<Item = (&'a DocId, &'a [f64])>,
{
    let mut scored: Vec<ScoredDoc> = candidates
        .into_iter()
        .map(|(id, vec)| ScoredDoc {
            doc: id.clone(),
            score: cosine(query, vec).unwrap_or(-1.0),
        })
        .collect();
    scored.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .expect("cosine scores are finite")
            .then_with(|| a.doc.cmp(&b.doc))
    });
    scored.truncate(cutoff);
    scored
}
