#![allow(dead_code)]

use lossgate::data::make_batches;
use lossgate::toy::{ToyCorpus, ToySpec};
use lossgate::trainer::{epoch_seed, Decision, RunOutcome, StepTrace, TrainerConfig};
use lossgate::{Example, TargetModel};

pub fn small_corpus(seed: u64) -> ToyCorpus {
    ToySpec {
        examples: 1_500,
        test_examples: 300,
        seed,
        ..ToySpec::default()
    }
    .generate()
    .unwrap()
}

/// Small-corpus config that reaches every stage quickly.
pub fn small_config(seed: u64) -> TrainerConfig {
    TrainerConfig {
        window_k: 8,
        predictor_window: 4,
        n0_fraction: 0.2,
        epochs: 2,
        seed,
        ..TrainerConfig::default()
    }
}

/// Re-run plain SGD over exactly the batches the trace marks as full steps.
pub fn replay(config: &TrainerConfig, train: &[Example], trace: &[StepTrace]) -> TargetModel {
    let mut model = TargetModel::new(config.learning_rate);
    for epoch in 0..config.epochs {
        let batches = make_batches(train, config.batch_size, epoch_seed(config.seed, epoch), config.shuffle).unwrap();
        for t in trace
            .iter()
            .filter(|t| t.epoch == epoch && t.decision == Decision::Full)
        {
            let batch = &batches[t.batch];
            let fwd = model.forward(batch).unwrap();
            model.backward(&fwd, batch).unwrap();
        }
    }
    model
}

/// Stage monotonicity, exact accounting, stage purity, and counts that
/// agree with the trace. Returns a description of the first violation.
pub fn check_run(outcome: &RunOutcome) -> Result<(), String> {
    let r = &outcome.report;
    let trace = &outcome.trace;
    if trace.len() as u64 != r.batches_total {
        return Err(format!(
            "trace has {} lines, report {} batches",
            trace.len(),
            r.batches_total
        ));
    }
    if r.full_steps + r.backward_skipped + r.forward_skipped != r.batches_total {
        return Err("counters do not add up".into());
    }
    let mut last = 0;
    let (mut full, mut fwd_only, mut skipped) = (0u64, 0u64, 0u64);
    for t in trace {
        let s = t.stage.index();
        if s < last {
            return Err(format!("stage went back from {last} to {s}"));
        }
        last = s;
        match (s, t.decision) {
            (0, Decision::Full) => {}
            (0, d) => return Err(format!("stage 0 recorded {d:?}")),
            (1, Decision::Skipped) => return Err("stage 1 skipped a forward pass".into()),
            _ => {}
        }
        match t.decision {
            Decision::Full => full += 1,
            Decision::ForwardOnly => fwd_only += 1,
            Decision::Skipped => skipped += 1,
        }
    }
    if (full, fwd_only, skipped) != (r.full_steps, r.backward_skipped, r.forward_skipped) {
        return Err("trace decisions disagree with counters".into());
    }
    let n = r.batches_total as f64;
    if r.alpha_b != r.backward_skipped as f64 / n || r.alpha_fb != r.forward_skipped as f64 / n {
        return Err("skip fractions disagree with counters".into());
    }
    Ok(())
}
