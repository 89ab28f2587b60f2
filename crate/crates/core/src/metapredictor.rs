//! Bernoulli Naive Bayes meta predictor.
//!
//! Predicts whether a batch is train-worthy (forward loss at or above the
//! loss threshold) from Bag-of-Words presence features alone. Counts are
//! accumulated online; the likelihood is taken over buckets the model has
//! observed under either class, since unobserved buckets carry no evidence.

use std::collections::{HashMap, VecDeque};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::BowVector;
use crate::error::{Error, Result};

/// Train-worthiness label for a batch: 1 iff `batch_loss >= threshold`.
/// Exactly the complement of [`crate::threshold::ThresholdState::should_skip_backward`].
pub fn make_label(batch_loss: f64, threshold: f64) -> u8 {
    u8::from(batch_loss >= threshold)
}

/// How per-example posteriors combine into one batch decision.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BatchPolicy {
    /// Mean posterior >= 0.5.
    #[default]
    Mean,
    /// At least half of the examples have posterior >= 0.5.
    Majority,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayesModel {
    class_counts: [u64; 2],
    token_counts: [HashMap<u32, u64>; 2],
    alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchPrediction {
    pub decision: u8,
    /// Mean posterior of class 1; `None` when the model has seen no data.
    pub mean_p1: Option<f64>,
}

impl Default for NaiveBayesModel {
    fn default() -> Self {
        Self::new(1.0)
    }
}

impl NaiveBayesModel {
    pub fn new(alpha: f64) -> Self {
        NaiveBayesModel {
            class_counts: [0, 0],
            token_counts: [HashMap::new(), HashMap::new()],
            alpha,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn class_counts(&self) -> [u64; 2] {
        self.class_counts
    }

    pub fn token_count(&self, class: u8, bucket: u32) -> u64 {
        self.token_counts[class as usize].get(&bucket).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.class_counts[0] + self.class_counts[1]
    }

    /// Both classes observed at least once.
    pub fn is_ready(&self) -> bool {
        self.class_counts[0] > 0 && self.class_counts[1] > 0
    }

    /// Buckets observed under either class, ascending.
    pub fn vocabulary(&self) -> Vec<u32> {
        let mut vocab: Vec<u32> = self.token_counts[0]
            .keys()
            .chain(self.token_counts[1].keys())
            .copied()
            .collect();
        vocab.sort_unstable();
        vocab.dedup();
        vocab
    }

    /// Count every vector as one example of `label`.
    pub fn update<'a, I>(&mut self, features: I, label: u8)
    where
        I: IntoIterator<Item = &'a BowVector>,
    {
        let class = usize::from(label.min(1));
        for vector in features {
            self.class_counts[class] += 1;
            for &b in vector.buckets() {
                *self.token_counts[class].entry(b).or_insert(0) += 1;
            }
        }
    }

    /// Precompute the per-class log terms so repeated posterior queries cost
    /// O(present buckets).
    pub fn scorer(&self) -> Result<Scorer> {
        let total = self.total();
        if total == 0 {
            return Err(Error::UntrainedPredictor);
        }
        let alpha = self.alpha;
        let mut base = [0.0f64; 2];
        for c in 0..2 {
            base[c] = ((self.class_counts[c] as f64 + alpha) / (total as f64 + 2.0 * alpha)).ln();
        }
        let mut deltas = HashMap::new();
        for b in self.vocabulary() {
            let mut delta = [0.0f64; 2];
            for c in 0..2 {
                let theta = (self.token_count(c as u8, b) as f64 + alpha) / (self.class_counts[c] as f64 + 2.0 * alpha);
                let absent = (1.0 - theta).ln();
                base[c] += absent;
                delta[c] = theta.ln() - absent;
            }
            deltas.insert(b, delta);
        }
        Ok(Scorer { base, deltas })
    }

    /// Posterior `P(train-worthy | features)`.
    pub fn posterior(&self, features: &BowVector) -> Result<f64> {
        Ok(self.scorer()?.posterior(features))
    }

    pub fn predict_batch(&self, batch: &[&BowVector], policy: BatchPolicy) -> BatchPrediction {
        let scorer = match self.scorer() {
            Ok(s) if !batch.is_empty() => s,
            _ => {
                return BatchPrediction {
                    decision: 1,
                    mean_p1: None,
                }
            }
        };
        let probs: Vec<f64> = batch.iter().map(|f| scorer.posterior(f)).collect();
        let mean_p1 = probs.iter().sum::<f64>() / probs.len() as f64;
        if !self.is_ready() {
            return BatchPrediction {
                decision: 1,
                mean_p1: Some(mean_p1),
            };
        }
        let decision = match policy {
            BatchPolicy::Mean => mean_p1 >= 0.5,
            BatchPolicy::Majority => 2 * probs.iter().filter(|&&p| p >= 0.5).count() >= probs.len(),
        };
        BatchPrediction {
            decision: u8::from(decision),
            mean_p1: Some(mean_p1),
        }
    }

    /// Mean negative log posterior of the true labels.
    pub fn predictor_loss(&self, batch: &[&BowVector], labels: &[u8]) -> Result<f64> {
        if batch.len() != labels.len() {
            return Err(Error::LengthMismatch {
                features: batch.len(),
                labels: labels.len(),
            });
        }
        if batch.is_empty() {
            return Ok(0.0);
        }
        let scorer = self.scorer()?;
        let total: f64 = batch
            .iter()
            .zip(labels)
            .map(|(f, &y)| scorer.neg_log_likelihood(f, y))
            .sum();
        Ok(total / batch.len() as f64)
    }

    pub fn to_checkpoint(&self) -> PredictorCheckpoint {
        let sparse = |m: &HashMap<u32, u64>| {
            let mut v: Vec<(u32, u64)> = m.iter().map(|(&b, &c)| (b, c)).collect();
            v.sort_unstable();
            v
        };
        PredictorCheckpoint {
            class_counts: self.class_counts,
            token_counts: [sparse(&self.token_counts[0]), sparse(&self.token_counts[1])],
            alpha: self.alpha,
        }
    }

    pub fn from_checkpoint(ckpt: &PredictorCheckpoint) -> Self {
        NaiveBayesModel {
            class_counts: ckpt.class_counts,
            token_counts: [
                ckpt.token_counts[0].iter().copied().collect(),
                ckpt.token_counts[1].iter().copied().collect(),
            ],
            alpha: ckpt.alpha,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(&self.to_checkpoint())?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let ckpt: PredictorCheckpoint = serde_json::from_str(&fs::read_to_string(path)?)?;
        Ok(Self::from_checkpoint(&ckpt))
    }
}

/// Snapshot of a [`NaiveBayesModel`] ready for repeated queries.
#[derive(Debug, Clone)]
pub struct Scorer {
    base: [f64; 2],
    deltas: HashMap<u32, [f64; 2]>,
}

impl Scorer {
    fn log_joint(&self, features: &BowVector) -> [f64; 2] {
        let mut score = self.base;
        for b in features.buckets() {
            if let Some(d) = self.deltas.get(b) {
                score[0] += d[0];
                score[1] += d[1];
            }
        }
        score
    }

    pub fn posterior(&self, features: &BowVector) -> f64 {
        let [s0, s1] = self.log_joint(features);
        let log_odds = s1 - s0;
        if log_odds >= 0.0 {
            1.0 / (1.0 + (-log_odds).exp())
        } else {
            let e = log_odds.exp();
            e / (1.0 + e)
        }
    }

    /// `-ln P(label | features)`, computed from log-odds without forming the
    /// probability first.
    pub fn neg_log_likelihood(&self, features: &BowVector, label: u8) -> f64 {
        let [s0, s1] = self.log_joint(features);
        let (own, other) = if label == 1 { (s1, s0) } else { (s0, s1) };
        let x = other - own;
        // ln(1 + e^x)
        if x > 0.0 {
            x + (-x).exp().ln_1p()
        } else {
            x.exp().ln_1p()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorCheckpoint {
    pub class_counts: [u64; 2],
    pub token_counts: [Vec<(u32, u64)>; 2],
    pub alpha: f64,
}

/// Ring buffer of the most recent predictor losses.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorLossWindow {
    window: VecDeque<f64>,
    capacity: usize,
}

impl PredictorLossWindow {
    pub fn new(capacity: usize) -> Self {
        let capacity = capacity.max(1);
        PredictorLossWindow {
            window: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    pub fn push(&mut self, loss: f64) {
        if self.window.len() == self.capacity {
            self.window.pop_front();
        }
        self.window.push_back(loss);
    }

    pub fn is_full(&self) -> bool {
        self.window.len() == self.capacity
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    /// Mean of the window, defined only once it is full.
    pub fn mean(&self) -> Option<f64> {
        self.is_full()
            .then(|| self.window.iter().sum::<f64>() / self.capacity as f64)
    }
}
