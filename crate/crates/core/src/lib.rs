//! Loss-gated data filtering for model finetuning.
//!
//! A training run moves through three stages: a warm-up that learns a loss
//! threshold from a moving average of batch losses, a stage that skips
//! backward passes on batches below that threshold while training a
//! Bag-of-Words Naive Bayes meta predictor, and a final stage where the
//! predictor skips whole batches before their forward pass. The target model
//! is a hashed-feature logistic regression, and the cost of a run is scored
//! with an analytic forward/backward time model, AGOT, and an energy
//! estimate.

pub mod data;
pub mod error;
pub mod experiment;
pub mod metapredictor;
pub mod metrics;
pub mod model;
pub mod threshold;
pub mod toy;
pub mod trainer;

pub use data::{load_dataset, make_batches, tokenize, vectorize, BowVector, Example, Format, MiniBatch};
pub use error::{Error, Result};
pub use experiment::{compare, run_sweep, run_with_reference, FlatConfig, SweepSpec};
pub use metapredictor::{make_label, BatchPolicy, NaiveBayesModel, PredictorLossWindow};
pub use metrics::{agot, energy_co2, t_norm, total_time, AgotParams, EnergyParams, SkipFractions, TimingModel};
pub use model::{ForwardResult, TargetModel};
pub use threshold::ThresholdState;
pub use trainer::{run, run_detailed, run_random_skip, Mode, RunReport, Stage, Trainer, TrainerConfig};
