//! A small hyperparameter sweep over N0, W and ALT plus fixed thresholds,
//! with the AGOT-optimal run picked out.

use lossgate::experiment::{run_sweep, SweepSpec};
use lossgate::toy::ToySpec;

fn main() -> lossgate::Result<()> {
    let corpus = ToySpec {
        examples: 5_000,
        ..ToySpec::default()
    }
    .generate()?;
    let spec = SweepSpec::from_toml(
        r#"
        n0_fractions = [0.1, 0.3]
        predictor_windows = [8, 16]
        alts = [0.2, 0.3, 0.5]
        fixed_thresholds = [0.3, 0.5]
        seeds = [0, 1]
        "#,
    )?;
    println!("{} runs", spec.run_count());
    let result = run_sweep(&spec, &corpus.train, &corpus.test)?;

    result.write_summary_csv(std::io::stdout().lock())?;
    if let Some(best) = result.optimal() {
        println!(
            "AGOT-optimal: {} (seed {}) agot {:.4}, accuracy {:.4}, T_norm {:.3}",
            best.point.key(),
            best.seed,
            best.report.agot.unwrap_or(f64::NAN),
            best.report.accuracy,
            best.report.t_norm
        );
    }
    Ok(())
}
