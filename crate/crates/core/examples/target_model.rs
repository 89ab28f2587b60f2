//! The hashed logistic-regression target model: separate forward and
//! backward passes, so a caller can look at the loss before deciding whether
//! to pay for the update.

use lossgate::data::MiniBatch;
use lossgate::{Example, TargetModel};

fn main() -> lossgate::Result<()> {
    let examples = vec![
        Example::new("great acting and a great plot", 1)?,
        Example::new("dull plot and weak acting", 0)?,
        Example::new("a great film", 1)?,
        Example::new("weak and dull", 0)?,
    ];
    let batch = MiniBatch {
        ordinal: 0,
        examples: examples.iter().collect(),
    };

    let mut model = TargetModel::new(0.5);
    for step in 0..10 {
        let fwd = model.forward(&batch)?;
        if step % 3 == 0 {
            println!("step {step}: batch loss {:.4}", fwd.batch_loss);
        }
        // Only the forward result of the current weights is accepted.
        model.backward(&fwd, &batch)?;
    }
    let stale = model.forward(&batch)?;
    model.backward(&stale, &batch)?;
    match model.backward(&stale, &batch) {
        Err(e) => println!("reusing a forward result after an update: {e}"),
        Ok(()) => unreachable!(),
    }

    let probe = Example::new("a great plot", 1)?;
    println!("P(positive | {:?}) = {:.3}", probe.text, model.prob_positive(&probe));
    println!("training accuracy {:.2}", model.evaluate(&examples));
    Ok(())
}
