//! One three-stage training run on the toy corpus: stage boundaries, skip
//! fractions, cost metrics, and a per-batch trace.

use lossgate::experiment::run_with_reference;
use lossgate::toy::ToySpec;
use lossgate::trainer::{write_trace, Decision};
use lossgate::TrainerConfig;

fn main() -> lossgate::Result<()> {
    let corpus = ToySpec::default().generate()?;
    let config = TrainerConfig {
        epochs: 2,
        ..TrainerConfig::default()
    };
    config.validate()?;

    let outcome = run_with_reference(&config, &corpus.train, &corpus.test)?;
    let r = &outcome.report;
    println!("accuracy {:.4} (untrained {:.4})", r.accuracy, r.base_accuracy);
    println!(
        "threshold L_low {:.4}, window variance at freeze {:.2e}",
        r.threshold.unwrap_or(f64::NAN),
        r.threshold_variance_at_freeze.unwrap_or(f64::NAN)
    );
    for b in &r.stage_boundaries {
        println!("entered {:?} at epoch {} batch {}", b.stage, b.epoch, b.batch);
    }
    println!(
        "{} batches: {} full, {} forward only, {} skipped",
        r.batches_total, r.full_steps, r.backward_skipped, r.forward_skipped
    );
    println!(
        "alpha_b {:.3}  alpha_fb {:.3}  T_norm {:.3}  AGOT {:.4}  {:.2e} kWh",
        r.alpha_b,
        r.alpha_fb,
        r.t_norm,
        r.agot.unwrap_or(f64::NAN),
        r.p_t
    );

    let skipped_epoch_2 = outcome
        .trace
        .iter()
        .filter(|t| t.epoch == 1 && t.decision == Decision::Skipped)
        .count();
    println!("fully skipped batches in epoch 2: {skipped_epoch_2}");

    let dir = std::env::temp_dir();
    write_trace(&dir.join("lossgate_trace.csv"), &outcome.trace)?;
    r.write_json(&dir.join("lossgate_report.json"))?;
    println!("trace and report written to {}", dir.display());
    Ok(())
}
