//! Seeded synthetic corpus with a controllable amount of redundancy.
//!
//! Each class owns a set of indicative tokens drawn with a Zipf-like
//! frequency profile; all documents also draw from a shared neutral
//! vocabulary. Unique documents are generated once and repeated
//! `duplication` times, and a fraction `label_noise` of unique documents has
//! its label flipped in the training split. The evaluation split is drawn
//! fresh from the same distribution with clean labels.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Example;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToySpec {
    /// Training examples, including duplicates.
    pub examples: usize,
    pub test_examples: usize,
    /// Copies of each unique training document.
    pub duplication: usize,
    /// Probability that a unique training document's label is flipped.
    pub label_noise: f64,
    /// Indicative tokens per class.
    pub class_vocab: usize,
    pub neutral_vocab: usize,
    /// Probability that a token is drawn from the document's class vocabulary.
    pub signal_rate: f64,
    /// Share of documents whose indicative tokens come from the long-tail tier.
    pub hard_fraction: f64,
    /// Long-tail indicative tokens per class, drawn uniformly.
    pub hard_vocab: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Exponent of the Zipf-like token frequency profile.
    pub zipf_exponent: f64,
    pub seed: u64,
}

impl Default for ToySpec {
    fn default() -> Self {
        ToySpec {
            examples: 20_000,
            test_examples: 4_000,
            duplication: 5,
            label_noise: 0.05,
            class_vocab: 400,
            neutral_vocab: 2_000,
            signal_rate: 0.25,
            hard_fraction: 0.6,
            hard_vocab: 500,
            min_len: 6,
            max_len: 18,
            zipf_exponent: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ToyCorpus {
    pub train: Vec<Example>,
    pub test: Vec<Example>,
}

struct Vocab {
    words: Vec<String>,
    dist: WeightedIndex<f64>,
}

impl Vocab {
    fn new(prefix: &str, size: usize, exponent: f64) -> Result<Self> {
        let words = (0..size).map(|i| format!("{prefix}{i}")).collect();
        let weights: Vec<f64> = (0..size).map(|r| 1.0 / ((r + 1) as f64).powf(exponent)).collect();
        let dist =
            WeightedIndex::new(weights).map_err(|e| Error::InvalidConfig(format!("vocabulary `{prefix}`: {e}")))?;
        Ok(Vocab { words, dist })
    }

    fn sample<'a, R: Rng>(&'a self, rng: &mut R) -> &'a str {
        &self.words[self.dist.sample(rng)]
    }
}

impl ToySpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.examples == 0 {
            return bad("toy corpus needs at least one example");
        }
        if self.duplication == 0 {
            return bad("duplication factor must be at least 1");
        }
        let probability = |p: f64| (0.0..=1.0).contains(&p);
        if !probability(self.label_noise) || !probability(self.signal_rate) || !probability(self.hard_fraction) {
            return bad("label_noise, signal_rate and hard_fraction must be probabilities");
        }
        if self.min_len == 0 || self.min_len > self.max_len {
            return bad("document lengths must satisfy 1 <= min_len <= max_len");
        }
        if self.class_vocab == 0 || self.neutral_vocab == 0 || self.hard_vocab == 0 {
            return bad("vocabularies must be non-empty");
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<ToyCorpus> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let classes = [
            Vocab::new("neg", self.class_vocab, self.zipf_exponent)?,
            Vocab::new("pos", self.class_vocab, self.zipf_exponent)?,
        ];
        let hard = [
            Vocab::new("hneg", self.hard_vocab, 0.0)?,
            Vocab::new("hpos", self.hard_vocab, 0.0)?,
        ];
        let neutral = Vocab::new("w", self.neutral_vocab, self.zipf_exponent)?;

        let document = |rng: &mut ChaCha8Rng, label: u8| -> String {
            let len = rng.gen_range(self.min_len..=self.max_len);
            let tier = if rng.gen::<f64>() < self.hard_fraction {
                &hard
            } else {
                &classes
            };
            let words: Vec<&str> = (0..len)
                .map(|_| {
                    if rng.gen::<f64>() < self.signal_rate {
                        tier[label as usize].sample(rng)
                    } else {
                        neutral.sample(rng)
                    }
                })
                .collect();
            words.join(" ")
        };

        let unique = self.examples.div_ceil(self.duplication);
        let mut train = Vec::with_capacity(unique * self.duplication);
        for _ in 0..unique {
            let label = rng.gen_range(0..2u8);
            let text = document(&mut rng, label);
            let observed = if rng.gen::<f64>() < self.label_noise {
                1 - label
            } else {
                label
            };
            let example = Example::new(text, observed)?;
            for _ in 0..self.duplication {
                train.push(example.clone());
            }
        }
        train.truncate(self.examples);
        train.shuffle(&mut rng);

        let mut test = Vec::with_capacity(self.test_examples);
        for _ in 0..self.test_examples {
            let label = rng.gen_range(0..2u8);
            test.push(Example::new(document(&mut rng, label), label)?);
        }
        Ok(ToyCorpus { train, test })
    }
}

/// Write examples as JSONL (`{"text": ..., "label": ...}` per line).
pub fn write_jsonl(path: &Path, examples: &[Example]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for e in examples {
        serde_json::to_writer(&mut out, &serde_json::json!({ "text": e.text, "label": e.label }))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}
