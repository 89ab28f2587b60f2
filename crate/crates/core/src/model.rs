//! Binary logistic regression over hashed presence features.
//!
//! Forward and backward are separate calls so the trainer can skip either
//! one. A [`ForwardResult`] is stamped with the model's step count and is
//! rejected by [`TargetModel::backward`] once the model has moved on.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{Example, MiniBatch, HASH_DIM};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TargetModel {
    weights: Vec<f64>,
    bias: f64,
    learning_rate: f64,
    step_count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardResult {
    pub per_example_losses: Vec<f64>,
    pub batch_loss: f64,
    /// Predicted probability of class 1 for each example.
    pub per_example_probs: Vec<f64>,
    computed_at_step: u64,
    batch_ordinal: usize,
}

/// Sparse gradient of the batch loss: `(bucket, d loss / d w)` sorted by
/// bucket, plus the bias component.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub weights: Vec<(u32, f64)>,
    pub bias: f64,
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Cross-entropy `-ln p(label)` for a logit `z`.
fn cross_entropy(z: f64, label: u8) -> f64 {
    if label == 1 {
        softplus(-z)
    } else {
        softplus(z)
    }
}

impl TargetModel {
    /// Zero-initialized model.
    pub fn new(learning_rate: f64) -> Self {
        TargetModel {
            weights: vec![0.0; HASH_DIM],
            bias: 0.0,
            learning_rate,
            step_count: 0,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn weight_mut(&mut self, bucket: u32) -> &mut f64 {
        &mut self.weights[bucket as usize]
    }

    pub fn bias_mut(&mut self) -> &mut f64 {
        &mut self.bias
    }

    pub fn logit(&self, example: &Example) -> f64 {
        example
            .features()
            .buckets()
            .iter()
            .fold(self.bias, |acc, &b| acc + self.weights[b as usize])
    }

    pub fn prob_positive(&self, example: &Example) -> f64 {
        sigmoid(self.logit(example))
    }

    /// Mean cross-entropy over the batch. Read-only.
    pub fn forward(&self, batch: &MiniBatch<'_>) -> Result<ForwardResult> {
        if batch.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let mut losses = Vec::with_capacity(batch.len());
        let mut probs = Vec::with_capacity(batch.len());
        for example in &batch.examples {
            let z = self.logit(example);
            if !z.is_finite() {
                return Err(Error::ModelDiverged);
            }
            losses.push(cross_entropy(z, example.label));
            probs.push(sigmoid(z));
        }
        let batch_loss = losses.iter().sum::<f64>() / losses.len() as f64;
        Ok(ForwardResult {
            per_example_losses: losses,
            batch_loss,
            per_example_probs: probs,
            computed_at_step: self.step_count,
            batch_ordinal: batch.ordinal,
        })
    }

    fn check_fresh(&self, result: &ForwardResult, batch: &MiniBatch<'_>) -> Result<()> {
        if result.computed_at_step != self.step_count {
            return Err(Error::StaleForward {
                computed_at: result.computed_at_step,
                model_at: self.step_count,
            });
        }
        if result.batch_ordinal != batch.ordinal || result.per_example_probs.len() != batch.len() {
            return Err(Error::ForwardBatchMismatch);
        }
        Ok(())
    }

    /// Gradient of the mean batch loss with respect to weights and bias.
    pub fn gradient(&self, result: &ForwardResult, batch: &MiniBatch<'_>) -> Result<Gradient> {
        self.check_fresh(result, batch)?;
        let n = batch.len() as f64;
        let mut entries: Vec<(u32, f64)> = Vec::new();
        let mut bias = 0.0;
        for (example, &p) in batch.examples.iter().zip(&result.per_example_probs) {
            let g = (p - f64::from(example.label)) / n;
            bias += g;
            entries.extend(example.features().buckets().iter().map(|&b| (b, g)));
        }
        // Stable sort keeps per-bucket summation in example order.
        entries.sort_by_key(|&(b, _)| b);
        let mut weights: Vec<(u32, f64)> = Vec::with_capacity(entries.len());
        for (b, g) in entries {
            match weights.last_mut() {
                Some((last, acc)) if *last == b => *acc += g,
                _ => weights.push((b, g)),
            }
        }
        Ok(Gradient { weights, bias })
    }

    /// One SGD step on the batch the forward result was computed for.
    pub fn backward(&mut self, result: &ForwardResult, batch: &MiniBatch<'_>) -> Result<()> {
        let grad = self.gradient(result, batch)?;
        let lr = self.learning_rate;
        for &(b, g) in &grad.weights {
            let w = &mut self.weights[b as usize];
            *w -= lr * g;
            if !w.is_finite() {
                return Err(Error::ModelDiverged);
            }
        }
        self.bias -= lr * grad.bias;
        if !self.bias.is_finite() {
            return Err(Error::ModelDiverged);
        }
        self.step_count += 1;
        Ok(())
    }

    /// Fraction of examples whose argmax prediction matches the label.
    /// Ties go to class 0.
    pub fn evaluate(&self, examples: &[Example]) -> f64 {
        if examples.is_empty() {
            return 0.0;
        }
        let correct = examples
            .iter()
            .filter(|e| u8::from(self.logit(e) > 0.0) == e.label)
            .count();
        correct as f64 / examples.len() as f64
    }

    pub fn to_checkpoint(&self) -> ModelCheckpoint {
        ModelCheckpoint {
            bias: self.bias,
            step_count: self.step_count,
            learning_rate: self.learning_rate,
            weights: self
                .weights
                .iter()
                .enumerate()
                .filter(|(_, w)| **w != 0.0)
                .map(|(b, &w)| (b as u32, w))
                .collect(),
        }
    }

    pub fn from_checkpoint(ckpt: &ModelCheckpoint) -> Result<Self> {
        let mut model = TargetModel::new(ckpt.learning_rate);
        for &(b, w) in &ckpt.weights {
            if b as usize >= HASH_DIM {
                return Err(Error::InvalidConfig(format!("checkpoint bucket {b} out of range")));
            }
            model.weights[b as usize] = w;
        }
        model.bias = ckpt.bias;
        model.step_count = ckpt.step_count;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string(&self.to_checkpoint())?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let ckpt: ModelCheckpoint = serde_json::from_str(&fs::read_to_string(path)?)?;
        Self::from_checkpoint(&ckpt)
    }
}

/// JSON checkpoint: non-zero `(bucket, weight)` pairs plus bias and step count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelCheckpoint {
    pub bias: f64,
    pub step_count: u64,
    pub learning_rate: f64,
    pub weights: Vec<(u32, f64)>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::make_batches;

    fn examples(rows: &[(&str, u8)]) -> Vec<Example> {
        rows.iter().map(|(t, l)| Example::new(*t, *l).unwrap()).collect()
    }

    #[test]
    fn zero_model_loss_is_ln2() {
        let ex = examples(&[("good movie", 1), ("bad plot", 0), ("meh", 1)]);
        let batch = &make_batches(&ex, 8, 0, false).unwrap()[0];
        let fwd = TargetModel::new(0.1).forward(batch).unwrap();
        assert!((fwd.batch_loss - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn confident_correct_model_has_zero_loss() {
        let ex = examples(&[("good", 1), ("good", 1)]);
        let batch = &make_batches(&ex, 8, 0, false).unwrap()[0];
        let mut model = TargetModel::new(0.1);
        *model.bias_mut() = 1000.0;
        let fwd = model.forward(batch).unwrap();
        assert_eq!(fwd.batch_loss, 0.0);
        let before = model.clone();
        model.backward(&fwd, batch).unwrap();
        assert_eq!(model.weights(), before.weights());
        assert_eq!(model.bias(), before.bias());
        assert_eq!(model.step_count(), 1);
    }

    #[test]
    fn quarter_probability_loss() {
        let ex = examples(&[("x", 1)]);
        let batch = &make_batches(&ex, 1, 0, false).unwrap()[0];
        let mut model = TargetModel::new(0.1);
        // sigmoid(-ln 3) = 0.25
        *model.bias_mut() = -(3.0f64).ln();
        let fwd = model.forward(batch).unwrap();
        assert!((fwd.per_example_probs[0] - 0.25).abs() < 1e-15);
        assert!((fwd.batch_loss - 1.3862943611198906).abs() < 1e-12);
    }

    #[test]
    fn non_finite_weights_are_reported() {
        let ex = examples(&[("x", 1)]);
        let batch = &make_batches(&ex, 1, 0, false).unwrap()[0];
        let mut model = TargetModel::new(0.1);
        *model.bias_mut() = f64::NAN;
        assert!(matches!(model.forward(batch), Err(Error::ModelDiverged)));
    }

    #[test]
    fn stale_forward_is_rejected() {
        let ex = examples(&[("a b", 1), ("c", 0)]);
        let batch = &make_batches(&ex, 2, 0, false).unwrap()[0];
        let mut model = TargetModel::new(0.5);
        let fwd = model.forward(batch).unwrap();
        model.backward(&fwd, batch).unwrap();
        assert!(matches!(
            model.backward(&fwd, batch),
            Err(Error::StaleForward {
                computed_at: 0,
                model_at: 1
            })
        ));
    }

    #[test]
    fn repeated_steps_reduce_batch_loss() {
        let ex = examples(&[("great fun", 1), ("awful bore", 0), ("great cast", 1), ("bore", 0)]);
        let batch = &make_batches(&ex, 4, 0, false).unwrap()[0];
        let mut model = TargetModel::new(0.5);
        let first = model.forward(batch).unwrap();
        model.backward(&first, batch).unwrap();
        let second = model.forward(batch).unwrap();
        model.backward(&second, batch).unwrap();
        let third = model.forward(batch).unwrap();
        assert!(second.batch_loss < first.batch_loss);
        assert!(third.batch_loss < second.batch_loss);
    }

    #[test]
    fn zero_model_predicts_class_zero() {
        let ex = examples(&[("a", 0), ("b", 1), ("c", 0), ("d", 1)]);
        assert_eq!(TargetModel::new(0.1).evaluate(&ex), 0.5);
        let ex = examples(&[("a", 0), ("b", 0), ("c", 0), ("d", 1)]);
        assert_eq!(TargetModel::new(0.1).evaluate(&ex), 0.75);
    }

    #[test]
    fn separable_set_reaches_full_accuracy() {
        let ex = examples(&[("alpha", 1), ("beta", 0), ("alpha", 1), ("beta", 0)]);
        let mut model = TargetModel::new(1.0);
        for epoch in 0..20 {
            for batch in make_batches(&ex, 2, epoch, true).unwrap() {
                let fwd = model.forward(&batch).unwrap();
                model.backward(&fwd, &batch).unwrap();
            }
        }
        assert_eq!(model.evaluate(&ex), 1.0);
    }

    #[test]
    fn checkpoint_round_trip() {
        let ex = examples(&[("a b", 1), ("c", 0)]);
        let batch = &make_batches(&ex, 2, 0, false).unwrap()[0];
        let mut model = TargetModel::new(0.3);
        let fwd = model.forward(batch).unwrap();
        model.backward(&fwd, batch).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        model.save(&path).unwrap();
        assert_eq!(TargetModel::load(&path).unwrap(), model);
        assert_eq!(model.to_checkpoint().weights.len(), 3);
    }
}
