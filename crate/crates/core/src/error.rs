use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset not found: {0}")]
    DatasetNotFound(PathBuf),

    #[error("line {line}: malformed record: {reason}")]
    MalformedRecord { line: usize, reason: String },

    #[error("line {line}: label out of range: {label}")]
    LabelOutOfRange { line: usize, label: i64 },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("batch size must be positive")]
    ZeroBatchSize,

    #[error("batch is empty")]
    EmptyBatch,

    #[error("model diverged: non-finite weights")]
    ModelDiverged,

    #[error("stale forward result: computed at step {computed_at}, model is at step {model_at}")]
    StaleForward { computed_at: u64, model_at: u64 },

    #[error("forward result does not belong to this batch")]
    ForwardBatchMismatch,

    #[error("threshold frozen")]
    ThresholdFrozen,

    #[error("threshold undefined: window has {have} of {need} losses")]
    ThresholdUndefined { have: usize, need: usize },

    #[error("cannot freeze threshold with a partial window ({have} of {need} losses)")]
    PartialWindow { have: usize, need: usize },

    #[error("untrained predictor")]
    UntrainedPredictor,

    #[error("length mismatch: {features} feature vectors, {labels} labels")]
    LengthMismatch { features: usize, labels: usize },

    #[error("invalid skip fractions: alpha_b={alpha_b}, alpha_fb={alpha_fb}")]
    InvalidSkipFractions { alpha_b: f64, alpha_fb: f64 },

    #[error("reference time must be positive, got {0}")]
    NonPositiveReferenceTime(f64),

    #[error("normalized time must be positive, got {0}")]
    NonPositiveNormalizedTime(f64),

    #[error("AGOT undefined: full-training accuracy equals base accuracy ({0})")]
    DegenerateAgot(f64),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("step called in {actual:?}, expected {expected:?}")]
    StageMismatch {
        expected: crate::trainer::Stage,
        actual: crate::trainer::Stage,
    },

    #[error("empty sweep grid")]
    EmptyGrid,

    #[error("sweep grid has {size} runs, cap is {cap}")]
    GridTooLarge { size: usize, cap: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    /// Whether the error stems from user input (config, paths, data files)
    /// rather than from a failure during training.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::DatasetNotFound(_)
                | Error::MalformedRecord { .. }
                | Error::LabelOutOfRange { .. }
                | Error::EmptyDataset
                | Error::ZeroBatchSize
                | Error::InvalidConfig(_)
                | Error::EmptyGrid
                | Error::GridTooLarge { .. }
                | Error::Toml(_)
        )
    }
}
