//! Every method against full training and against random skipping matched
//! to each method's realized skip ratio.

use lossgate::experiment::{compare, write_compare_csv};
use lossgate::toy::ToySpec;
use lossgate::TrainerConfig;

fn main() -> lossgate::Result<()> {
    let corpus = ToySpec {
        examples: 10_000,
        ..ToySpec::default()
    }
    .generate()?;
    let rows = compare(
        &TrainerConfig::default(),
        &corpus.train,
        &corpus.test,
        &[0, 1, 2],
        &[0.1, 0.3, 0.5, 0.7],
    )?;

    println!(
        "{:<22} {:<22} {:>16} {:>16} {:>6}",
        "method", "matched to", "accuracy", "T_norm", "skip"
    );
    for r in &rows {
        println!(
            "{:<22} {:<22} {:>7.4} ± {:.4} {:>7.3} ± {:.3} {:>6.3}",
            r.method,
            r.matched_to.as_deref().unwrap_or("-"),
            r.accuracy_mean,
            r.accuracy_std,
            r.t_norm_mean,
            r.t_norm_std,
            r.skip_mean
        );
    }
    println!();
    write_compare_csv(&rows, std::io::stdout().lock())
}
