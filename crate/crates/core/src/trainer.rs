//! Three-stage loss-gated training loop and its baseline modes.
//!
//! Stage 0 runs every pass and feeds batch losses into the moving-average
//! threshold. Once the stage-0 budget is spent and the window is full, the
//! threshold freezes and stage 1 starts skipping backward passes on batches
//! whose loss falls below it, while training the Naive Bayes meta predictor
//! on those decisions. When the predictor's windowed loss drops below `alt`,
//! stage 2 lets the predictor skip whole batches before any forward pass.
//!
//! Baselines reuse the same machinery pinned to one stage:
//!
//! | mode               | stages      | skips                         |
//! |--------------------|-------------|-------------------------------|
//! | `TrainAll`         | 0           | none                          |
//! | `AutoThresholdOnly`| 0 then 1    | backward only                 |
//! | `FixedThreshold(t)`| 1           | backward only, `L_low = t`    |
//! | `RandomSkip(r)`    | 2           | both passes, probability `r`  |

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{make_batches, Example, MiniBatch};
use crate::error::{Error, Result};
use crate::metapredictor::{make_label, BatchPolicy, NaiveBayesModel, PredictorLossWindow};
use crate::metrics::{self, AgotParams, EnergyParams, SkipFractions, TimingModel};
use crate::model::TargetModel;
use crate::threshold::ThresholdState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stage {
    Stage0,
    Stage1,
    Stage2,
}

impl Stage {
    pub fn index(self) -> u8 {
        match self {
            Stage::Stage0 => 0,
            Stage::Stage1 => 1,
            Stage::Stage2 => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum Mode {
    ThreeStage,
    TrainAll,
    FixedThreshold(f64),
    AutoThresholdOnly,
    RandomSkip(f64),
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::ThreeStage => f.write_str("three-stage"),
            Mode::TrainAll => f.write_str("train-all"),
            Mode::FixedThreshold(t) => write!(f, "fixed-threshold:{t}"),
            Mode::AutoThresholdOnly => f.write_str("auto-threshold"),
            Mode::RandomSkip(r) => write!(f, "random-skip:{r}"),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let value = |what: &str| -> Result<f64> {
            arg.ok_or_else(|| Error::InvalidConfig(format!("mode `{name}` needs a {what}, e.g. `{name}:0.3`")))?
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad {what} in mode `{s}`")))
        };
        match name {
            "three-stage" => Ok(Mode::ThreeStage),
            "train-all" => Ok(Mode::TrainAll),
            "auto-threshold" | "auto-threshold-only" => Ok(Mode::AutoThresholdOnly),
            "fixed-threshold" | "fixed" => Ok(Mode::FixedThreshold(value("threshold")?)),
            "random-skip" | "random" => Ok(Mode::RandomSkip(value("ratio")?)),
            _ => Err(Error::InvalidConfig(format!("unknown mode `{s}`"))),
        }
    }
}

/// Power draws used to turn the analytic time into energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyConfig {
    pub p_cpu: f64,
    pub p_dram: f64,
    pub p_gpu: f64,
    pub gpu_count: f64,
    /// Seconds represented by one unit of the time model.
    pub time_unit_seconds: f64,
    pub pue: f64,
    pub co2_per_kwh: f64,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        EnergyConfig {
            p_cpu: 65.0,
            p_dram: 10.0,
            p_gpu: 250.0,
            gpu_count: 1.0,
            time_unit_seconds: 1.0,
            pue: metrics::DEFAULT_PUE,
            co2_per_kwh: metrics::DEFAULT_CO2_PER_KWH,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainerConfig {
    pub mode: Mode,
    /// Fraction of one epoch's batches spent in stage 0.
    pub n0_fraction: f64,
    /// Window size of the loss threshold moving average.
    pub window_k: usize,
    /// Window size over predictor losses.
    pub predictor_window: usize,
    /// Average predictor loss that ends stage 1.
    pub alt: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub learning_rate: f64,
    /// Skip iff `loss < skip_margin * L_low`.
    pub skip_margin: f64,
    /// Only reported; does not gate the stage-0 exit.
    pub variance_tolerance: f64,
    pub nb_alpha: f64,
    pub batch_policy: BatchPolicy,
    pub predictor_enabled: bool,
    /// Replaces the learned threshold when it freezes.
    pub threshold_override: Option<f64>,
    pub shuffle: bool,
    pub timing: TimingModel,
    pub epsilon: f64,
    pub energy: EnergyConfig,
    pub eval_every_epoch: bool,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            mode: Mode::ThreeStage,
            n0_fraction: 0.3,
            window_k: 64,
            predictor_window: 16,
            alt: 0.3,
            epochs: 1,
            batch_size: 16,
            seed: 0,
            learning_rate: 0.5,
            skip_margin: 1.0,
            variance_tolerance: 1e-4,
            nb_alpha: 1.0,
            batch_policy: BatchPolicy::Mean,
            predictor_enabled: true,
            threshold_override: None,
            shuffle: true,
            timing: TimingModel::default(),
            epsilon: metrics::DEFAULT_EPSILON,
            energy: EnergyConfig::default(),
            eval_every_epoch: false,
        }
    }
}

impl TrainerConfig {
    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_epochs(mut self, epochs: usize) -> Self {
        self.epochs = epochs;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.n0_fraction > 0.0 && self.n0_fraction <= 1.0) {
            return bad(format!("n0_fraction must be in (0, 1], got {}", self.n0_fraction));
        }
        if !(self.alt > 0.0) {
            return bad(format!("alt must be positive, got {}", self.alt));
        }
        if self.predictor_window == 0 || self.window_k == 0 {
            return bad("window sizes must be at least 1".into());
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1".into());
        }
        if self.batch_size == 0 {
            return Err(Error::ZeroBatchSize);
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if !(self.nb_alpha > 0.0) {
            return bad(format!("nb_alpha must be positive, got {}", self.nb_alpha));
        }
        if !(self.skip_margin > 0.0) {
            return bad(format!("skip_margin must be positive, got {}", self.skip_margin));
        }
        match self.mode {
            Mode::RandomSkip(r) if !(0.0..1.0).contains(&r) => {
                bad(format!("random skip ratio must be in [0, 1), got {r}"))
            }
            Mode::FixedThreshold(t) if t.is_nan() => bad("fixed threshold is NaN".into()),
            _ => TimingModel::new(self.timing.t_forward, self.timing.t_backward).map(|_| ()),
        }
    }

    fn predictor_active(&self) -> bool {
        self.mode == Mode::ThreeStage && self.predictor_enabled
    }
}

/// Shuffle seed for a given epoch; epochs reshuffle independently.
pub fn epoch_seed(seed: u64, epoch: usize) -> u64 {
    seed ^ (epoch as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

const RANDOM_SKIP_STREAM: u64 = 0xD1B5_4A32_D192_ED03;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decision {
    Full,
    ForwardOnly,
    Skipped,
}

impl Decision {
    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Full => "full",
            Decision::ForwardOnly => "forward-only",
            Decision::Skipped => "skipped",
        }
    }
}

/// What happened to one batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepTrace {
    pub epoch: usize,
    /// Ordinal within the epoch.
    pub batch: usize,
    pub stage: Stage,
    pub decision: Decision,
    pub loss: Option<f64>,
    pub predictor_p1: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageBoundary {
    pub epoch: usize,
    /// First batch (within the epoch) processed in the new stage.
    pub batch: usize,
    pub stage: Stage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainerState {
    pub stage: Stage,
    pub batches_seen: u64,
    pub full_steps: u64,
    pub backward_skipped: u64,
    pub forward_skipped: u64,
    pub epoch_index: usize,
    pub threshold: ThresholdState,
    pub predictor: NaiveBayesModel,
    pub predictor_window: PredictorLossWindow,
    pub stage_boundaries: Vec<StageBoundary>,
    /// Threshold window variance at the stage 0 -> 1 transition.
    pub freeze_variance: Option<f64>,
}

impl TrainerState {
    fn new(config: &TrainerConfig) -> Self {
        let (stage, threshold) = match config.mode {
            Mode::FixedThreshold(t) => (Stage::Stage1, ThresholdState::fixed(t)),
            Mode::RandomSkip(_) => (Stage::Stage2, ThresholdState::new(config.window_k)),
            _ => (
                Stage::Stage0,
                ThresholdState::new(config.window_k).with_margin(config.skip_margin),
            ),
        };
        TrainerState {
            stage,
            batches_seen: 0,
            full_steps: 0,
            backward_skipped: 0,
            forward_skipped: 0,
            epoch_index: 0,
            threshold,
            predictor: NaiveBayesModel::new(config.nb_alpha),
            predictor_window: PredictorLossWindow::new(config.predictor_window),
            stage_boundaries: Vec::new(),
            freeze_variance: None,
        }
    }
}

/// One training run: configuration, state machine and target model.
pub struct Trainer {
    config: TrainerConfig,
    state: TrainerState,
    model: TargetModel,
    skip_rng: ChaCha8Rng,
    overhead_secs: f64,
}

impl Trainer {
    pub fn new(config: TrainerConfig) -> Result<Self> {
        config.validate()?;
        let state = TrainerState::new(&config);
        let model = TargetModel::new(config.learning_rate);
        let skip_rng = ChaCha8Rng::seed_from_u64(config.seed ^ RANDOM_SKIP_STREAM);
        Ok(Trainer {
            config,
            state,
            model,
            skip_rng,
            overhead_secs: 0.0,
        })
    }

    pub fn config(&self) -> &TrainerConfig {
        &self.config
    }

    pub fn state(&self) -> &TrainerState {
        &self.state
    }

    pub fn model(&self) -> &TargetModel {
        &self.model
    }

    pub fn into_parts(self) -> (TrainerState, TargetModel) {
        (self.state, self.model)
    }

    fn expect_stage(&self, expected: Stage) -> Result<()> {
        if self.state.stage != expected {
            return Err(Error::StageMismatch {
                expected,
                actual: self.state.stage,
            });
        }
        Ok(())
    }

    fn trace(&self, batch: &MiniBatch<'_>, decision: Decision, loss: Option<f64>, p1: Option<f64>) -> StepTrace {
        StepTrace {
            epoch: self.state.epoch_index,
            batch: batch.ordinal,
            stage: self.state.stage,
            decision,
            loss,
            predictor_p1: p1,
        }
    }

    fn full_step(&mut self, batch: &MiniBatch<'_>) -> Result<f64> {
        let fwd = self.model.forward(batch)?;
        self.model.backward(&fwd, batch)?;
        self.state.full_steps += 1;
        Ok(fwd.batch_loss)
    }

    /// Forward, then backward unless the loss is below the threshold.
    /// Trains the predictor on the outcome when it is active.
    fn filtered_step(&mut self, batch: &MiniBatch<'_>, p1: Option<f64>) -> Result<StepTrace> {
        let fwd = self.model.forward(batch)?;
        let started = Instant::now();
        let threshold = self.state.threshold.effective()?;
        let label = make_label(fwd.batch_loss, threshold);
        if self.config.predictor_active() {
            let features = batch.features();
            if self.state.stage == Stage::Stage1 && self.state.predictor.total() > 0 {
                let labels = vec![label; features.len()];
                let lmp = self.state.predictor.predictor_loss(&features, &labels)?;
                self.state.predictor_window.push(lmp);
            }
            self.state.predictor.update(features.iter().copied(), label);
        }
        self.overhead_secs += started.elapsed().as_secs_f64();
        let decision = if label == 1 {
            self.model.backward(&fwd, batch)?;
            self.state.full_steps += 1;
            Decision::Full
        } else {
            self.state.backward_skipped += 1;
            Decision::ForwardOnly
        };
        Ok(self.trace(batch, decision, Some(fwd.batch_loss), p1))
    }

    pub fn step_stage0(&mut self, batch: &MiniBatch<'_>) -> Result<StepTrace> {
        self.expect_stage(Stage::Stage0)?;
        let loss = self.full_step(batch)?;
        if self.config.mode != Mode::TrainAll {
            let started = Instant::now();
            self.state.threshold.observe_loss(loss)?;
            self.overhead_secs += started.elapsed().as_secs_f64();
        }
        Ok(self.trace(batch, Decision::Full, Some(loss), None))
    }

    pub fn step_stage1(&mut self, batch: &MiniBatch<'_>) -> Result<StepTrace> {
        self.expect_stage(Stage::Stage1)?;
        self.filtered_step(batch, None)
    }

    pub fn step_stage2(&mut self, batch: &MiniBatch<'_>) -> Result<StepTrace> {
        self.expect_stage(Stage::Stage2)?;
        if let Mode::RandomSkip(ratio) = self.config.mode {
            let skip = self.skip_rng.gen::<f64>() < ratio;
            if skip {
                self.state.forward_skipped += 1;
                return Ok(self.trace(batch, Decision::Skipped, None, None));
            }
            let loss = self.full_step(batch)?;
            return Ok(self.trace(batch, Decision::Full, Some(loss), None));
        }
        let started = Instant::now();
        let prediction = self
            .state
            .predictor
            .predict_batch(&batch.features(), self.config.batch_policy);
        self.overhead_secs += started.elapsed().as_secs_f64();
        if prediction.decision == 0 {
            self.state.forward_skipped += 1;
            return Ok(self.trace(batch, Decision::Skipped, None, prediction.mean_p1));
        }
        self.filtered_step(batch, prediction.mean_p1)
    }

    /// Process one batch in the current stage, then check for a transition.
    pub fn step(&mut self, batch: &MiniBatch<'_>, batches_per_epoch: usize) -> Result<StepTrace> {
        let trace = match self.state.stage {
            Stage::Stage0 => self.step_stage0(batch),
            Stage::Stage1 => self.step_stage1(batch),
            Stage::Stage2 => self.step_stage2(batch),
        }?;
        self.state.batches_seen += 1;
        self.maybe_transition(batches_per_epoch, batch.ordinal + 1)?;
        Ok(trace)
    }

    /// Number of batches stage 0 must run before it may end.
    pub fn stage0_budget(&self, batches_per_epoch: usize) -> u64 {
        // Small slack so that e.g. 0.3 * 10 does not round up to 4.
        ((self.config.n0_fraction * batches_per_epoch as f64) - 1e-9)
            .ceil()
            .max(1.0) as u64
    }

    /// Advance the stage if its exit condition holds. `next_batch` is the
    /// within-epoch ordinal the new stage would start at.
    pub fn maybe_transition(&mut self, batches_per_epoch: usize, next_batch: usize) -> Result<Stage> {
        let next = match (self.state.stage, self.config.mode) {
            (Stage::Stage0, Mode::ThreeStage | Mode::AutoThresholdOnly) => {
                let budget_spent = self.state.batches_seen >= self.stage0_budget(batches_per_epoch);
                if budget_spent && self.state.threshold.is_full() {
                    self.state.freeze_variance = Some(self.state.threshold.variance());
                    self.state.threshold.freeze()?;
                    if let Some(pinned) = self.config.threshold_override {
                        self.state.threshold = ThresholdState::fixed(pinned);
                    }
                    Some(Stage::Stage1)
                } else {
                    None
                }
            }
            (Stage::Stage1, Mode::ThreeStage) if self.config.predictor_active() => self
                .state
                .predictor_window
                .mean()
                .filter(|&m| m < self.config.alt)
                .map(|_| Stage::Stage2),
            _ => None,
        };
        if let Some(stage) = next {
            self.state.stage = stage;
            self.state.stage_boundaries.push(StageBoundary {
                epoch: self.state.epoch_index,
                batch: next_batch,
                stage,
            });
        }
        Ok(self.state.stage)
    }

    /// Run one epoch over `train`, appending per-batch traces.
    pub fn run_epoch(&mut self, train: &[Example], trace: &mut Vec<StepTrace>) -> Result<()> {
        let seed = epoch_seed(self.config.seed, self.state.epoch_index);
        let batches = make_batches(train, self.config.batch_size, seed, self.config.shuffle)?;
        let per_epoch = batches.len();
        for batch in &batches {
            trace.push(self.step(batch, per_epoch)?);
        }
        self.state.epoch_index += 1;
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Wall-clock seconds spent in threshold and predictor bookkeeping.
    /// Not part of the time model.
    pub filter_overhead_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub mode: String,
    pub accuracy: f64,
    /// Accuracy of the untrained (zero) model on the same evaluation set.
    pub base_accuracy: f64,
    pub epoch_accuracies: Vec<f64>,
    pub batches_total: u64,
    pub full_steps: u64,
    pub backward_skipped: u64,
    pub forward_skipped: u64,
    pub alpha_b: f64,
    pub alpha_fb: f64,
    #[serde(rename = "T")]
    pub time: f64,
    #[serde(rename = "T_all")]
    pub time_all: f64,
    #[serde(rename = "T_norm")]
    pub t_norm: f64,
    pub agot: Option<f64>,
    pub p_t: f64,
    pub co2e: f64,
    pub final_stage: Stage,
    pub stage_boundaries: Vec<StageBoundary>,
    pub threshold: Option<f64>,
    pub threshold_variance_at_freeze: Option<f64>,
    pub threshold_stable_at_freeze: Option<bool>,
    pub config: TrainerConfig,
    pub diagnostics: Diagnostics,
}

impl RunReport {
    pub fn skip_fractions(&self) -> SkipFractions {
        SkipFractions {
            alpha_b: self.alpha_b,
            alpha_fb: self.alpha_fb,
        }
    }

    /// Combined fraction of batches that received no backward pass.
    pub fn skip_ratio(&self) -> f64 {
        self.alpha_b + self.alpha_fb
    }

    /// Fill in AGOT against a full-training accuracy. Leaves `agot` empty
    /// when it is undefined (full accuracy equal to the base accuracy, or
    /// zero normalized time).
    pub fn attach_agot(&mut self, a_full: f64) {
        let params = AgotParams::new(self.base_accuracy, a_full).with_epsilon(self.config.epsilon);
        self.agot = metrics::agot(self.accuracy, self.t_norm, params).ok();
    }

    /// Copy with the wall-clock diagnostics cleared, for equality checks.
    pub fn without_diagnostics(&self) -> RunReport {
        RunReport {
            diagnostics: Diagnostics::default(),
            ..self.clone()
        }
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

pub struct RunOutcome {
    pub report: RunReport,
    pub trace: Vec<StepTrace>,
    pub model: TargetModel,
    pub predictor: NaiveBayesModel,
}

/// Train on `train` and evaluate on `eval` (or on `train` when `eval` is
/// empty).
pub fn run_detailed(config: &TrainerConfig, train: &[Example], eval: &[Example]) -> Result<RunOutcome> {
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let eval = if eval.is_empty() { train } else { eval };
    let mut trainer = Trainer::new(config.clone())?;
    let mut trace = Vec::new();
    let mut epoch_accuracies = Vec::new();
    for _ in 0..config.epochs {
        trainer.run_epoch(train, &mut trace)?;
        if config.eval_every_epoch {
            epoch_accuracies.push(trainer.model().evaluate(eval));
        }
    }
    let overhead = trainer.overhead_secs;
    let (state, model) = trainer.into_parts();

    let accuracy = model.evaluate(eval);
    let base_accuracy = TargetModel::new(config.learning_rate).evaluate(eval);
    let total = state.batches_seen;
    let fractions = SkipFractions::from_counts(state.backward_skipped, state.forward_skipped, total)?;
    let time = metrics::total_time(fractions, config.timing, total)?;
    let time_all = metrics::total_time(SkipFractions::new(0.0, 0.0)?, config.timing, total)?;
    let t_norm = metrics::t_norm(time, time_all)?;
    let e = config.energy;
    let energy = metrics::energy_co2(EnergyParams {
        p_cpu: e.p_cpu,
        p_dram: e.p_dram,
        p_gpu: e.p_gpu,
        gpu_count: e.gpu_count,
        hours: time * e.time_unit_seconds / 3600.0,
        pue: e.pue,
        co2_per_kwh: e.co2_per_kwh,
    });
    let threshold = match config.mode {
        Mode::TrainAll | Mode::RandomSkip(_) => None,
        _ => state.threshold.low(),
    };

    let mut report = RunReport {
        mode: config.mode.to_string(),
        accuracy,
        base_accuracy,
        epoch_accuracies,
        batches_total: total,
        full_steps: state.full_steps,
        backward_skipped: state.backward_skipped,
        forward_skipped: state.forward_skipped,
        alpha_b: fractions.alpha_b,
        alpha_fb: fractions.alpha_fb,
        time,
        time_all,
        t_norm,
        agot: None,
        p_t: energy.kwh,
        co2e: energy.co2e_lbs,
        final_stage: state.stage,
        stage_boundaries: state.stage_boundaries.clone(),
        threshold,
        threshold_variance_at_freeze: state.freeze_variance,
        threshold_stable_at_freeze: state.freeze_variance.map(|v| v <= config.variance_tolerance),
        config: config.clone(),
        diagnostics: Diagnostics {
            filter_overhead_secs: overhead,
        },
    };
    if config.mode == Mode::TrainAll {
        report.attach_agot(accuracy);
    }
    Ok(RunOutcome {
        report,
        trace,
        model,
        predictor: state.predictor,
    })
}

pub fn run(config: &TrainerConfig, train: &[Example], eval: &[Example]) -> Result<RunReport> {
    run_detailed(config, train, eval).map(|o| o.report)
}

/// Matched-ratio control: skip each batch (both passes) with probability
/// `target_ratio`.
pub fn run_random_skip(
    config: &TrainerConfig,
    train: &[Example],
    eval: &[Example],
    target_ratio: f64,
) -> Result<RunReport> {
    let config = config.clone().with_mode(Mode::RandomSkip(target_ratio));
    run(&config, train, eval)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One line per batch: `epoch,batch,stage,decision,loss,predictor_p1`, with
/// the last two empty when not computed. No header.
pub fn write_trace(path: &Path, trace: &[StepTrace]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for t in trace {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            t.epoch,
            t.batch,
            t.stage.index(),
            t.decision.as_str(),
            opt(t.loss),
            opt(t.predictor_p1)
        )?;
    }
    out.flush()?;
    Ok(())
}
