//! PV-DM training loop and paragraph inference.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{context_into, PvDmConfig, PvDmModel, StepScratch, Vocabulary};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::text::NormalizedDocument;

/// Learning rate floor reached at the end of the linear decay.
const LR_FINAL: f64 = 1e-4;

/// Keeps the shuffle/sampling stream distinct from the one that initialized
/// the parameter matrices.
const TRAIN_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;
const INFER_STREAM: u64 = 0xc2b2_ae3d_27d4_eb4f;

/// Per-epoch training diagnostics.
#[derive(Debug, Clone)]
pub struct TrainStats {
    /// Mean negative-sampling loss of each epoch, in epoch order.
    pub epoch_mean_loss: Vec<f64>,
    pub examples_per_epoch: usize,
}

/// Draws negatives from the unigram distribution raised to 0.75 over the
/// vocabulary, excluding the null token.
pub(crate) struct NegativeSampler {
    cumulative: Vec<f64>,
    total: f64,
}

impl NegativeSampler {
    pub(crate) fn new(vocab: &Vocabulary) -> Self {
        let mut cumulative = Vec::with_capacity(vocab.len().saturating_sub(1));
        let mut total = 0.0;
        for &count in &vocab.counts()[1..] {
            total += (count as f64).powf(0.75);
            cumulative.push(total);
        }
        Self { cumulative, total }
    }

    fn draw_one(&self, rng: &mut ChaCha8Rng) -> usize {
        let u = rng.random_range(0.0..self.total);
        let pos = self.cumulative.partition_point(|&c| c <= u);
        pos.min(self.cumulative.len() - 1) + 1
    }

    /// Draws `n` negatives, rejecting draws equal to `target`. Gives up on a
    /// slot after 100 rejections (only possible in degenerate vocabularies).
    pub(crate) fn draw_into(
        &self,
        n: usize,
        target: usize,
        rng: &mut ChaCha8Rng,
        out: &mut Vec<usize>,
    ) {
        out.clear();
        for _ in 0..n {
            for _attempt in 0..100 {
                let candidate = self.draw_one(rng);
                if candidate != target {
                    out.push(candidate);
                    break;
                }
            }
        }
    }
}

fn lr_at(step: usize, total_steps: usize, initial: f64) -> f64 {
    if total_steps <= 1 {
        return initial;
    }
    let progress = step as f64 / (total_steps - 1) as f64;
    initial + (LR_FINAL - initial) * progress
}

/// Trains a PV-DM model over a corpus (for the retrieval runs: candidate
/// cases plus query documents). Runs `epochs` passes over all examples with
/// a per-epoch shuffle; deterministic for a fixed seed.
pub fn train(corpus: &Corpus, config: &PvDmConfig) -> Result<(PvDmModel, TrainStats)> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let vocab = Vocabulary::build(corpus, config.min_count)?;
    let paragraphs = corpus
        .documents()
        .iter()
        .map(|d| d.doc_id.clone())
        .collect();
    let mut model = PvDmModel::init(vocab, paragraphs, config.clone());

    let sequences: Vec<Vec<usize>> = corpus
        .documents()
        .iter()
        .map(|d| model.vocab().doc_indices(d))
        .collect();
    let mut examples: Vec<(u32, u32)> = sequences
        .iter()
        .enumerate()
        .flat_map(|(d, seq)| (0..seq.len()).map(move |t| (d as u32, t as u32)))
        .collect();

    let sampler = NegativeSampler::new(model.vocab());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ TRAIN_STREAM);
    let total_steps = config.epochs * examples.len();
    let mut stats = TrainStats {
        epoch_mean_loss: Vec::with_capacity(config.epochs),
        examples_per_epoch: examples.len(),
    };

    let mut scratch = StepScratch::new(config.input_width());
    let mut context = Vec::with_capacity(config.window);
    let mut negatives = Vec::with_capacity(config.negatives);
    let mut step = 0;
    for _epoch in 0..config.epochs {
        examples.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for &(d, t) in &examples {
            let (d, t) = (d as usize, t as usize);
            let seq = &sequences[d];
            let target = seq[t];
            context_into(seq, t, config.window, &mut context);
            sampler.draw_into(config.negatives, target, &mut rng, &mut negatives);
            let lr = lr_at(step, total_steps, config.learning_rate);
            epoch_loss +=
                model.sgd_step_scratch(d, &context, target, &negatives, lr, &mut scratch);
            step += 1;
        }
        let mean = if examples.is_empty() {
            0.0
        } else {
            epoch_loss / examples.len() as f64
        };
        stats.epoch_mean_loss.push(mean);
    }
    Ok((model, stats))
}

/// Controls paragraph inference: at most `steps` passes over the document,
/// stopping early once the vector moves less than `tolerance` (L2) in a pass.
#[derive(Debug, Clone, Copy)]
pub struct InferParams {
    pub steps: usize,
    pub tolerance: f64,
}

impl Default for InferParams {
    fn default() -> Self {
        Self {
            steps: 50,
            tolerance: 1e-4,
        }
    }
}

impl PvDmModel {
    /// Infers a vector for unseen text: a fresh seeded paragraph vector is
    /// trained by the same SGD loop with word vectors and output weights
    /// frozen. Errors when the document shares no terms with the vocabulary.
    pub fn infer(&self, doc: &NormalizedDocument, params: &InferParams) -> Result<Vec<f64>> {
        let seq = self.vocab().doc_indices(doc);
        if seq.is_empty() {
            return Err(Error::EmptyOverlap {
                label: doc.doc_id.label.clone(),
            });
        }
        let config = self.config();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ INFER_STREAM);
        let half = 0.5 / config.dim as f64;
        let mut vector: Vec<f64> = (0..config.dim)
            .map(|_| rng.random_range(-half..half))
            .collect();

        let sampler = NegativeSampler::new(self.vocab());
        let total_steps = params.steps * seq.len();
        let mut scratch = StepScratch::new(config.input_width());
        let mut context = Vec::with_capacity(config.window);
        let mut negatives = Vec::with_capacity(config.negatives);
        let mut step = 0;
        for _pass in 0..params.steps {
            let before = vector.clone();
            for t in 0..seq.len() {
                context_into(&seq, t, config.window, &mut context);
                sampler.draw_into(config.negatives, seq[t], &mut rng, &mut negatives);
                let lr = lr_at(step, total_steps, config.learning_rate);
                self.inference_step(&mut vector, &context, seq[t], &negatives, lr, &mut scratch);
                step += 1;
            }
            let displacement = vector
                .iter()
                .zip(&before)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if displacement < params.tolerance {
                break;
            }
        }
        Ok(vector)
    }
}
