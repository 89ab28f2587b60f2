//! The automatic loss threshold: a moving average over the last K batch
//! losses that is frozen once warm-up ends.

use lossgate::ThresholdState;

fn main() -> lossgate::Result<()> {
    // A loss curve that decays towards 0.3 with a little wobble.
    let losses: Vec<f64> = (0..40)
        .map(|i| 0.3 + 0.4 * (-(i as f64) / 8.0).exp() + 0.01 * ((i * 7 % 5) as f64 - 2.0))
        .collect();

    let mut threshold = ThresholdState::new(8);
    for (i, &loss) in losses.iter().enumerate().take(24) {
        threshold.observe_loss(loss)?;
        if let Some(low) = threshold.low() {
            println!(
                "batch {i:>2}: loss {loss:.3}  L_low {low:.3}  variance {:.2e}",
                threshold.variance()
            );
        } else {
            println!(
                "batch {i:>2}: loss {loss:.3}  (window {}/{})",
                threshold.len(),
                threshold.window_size()
            );
        }
    }

    threshold.freeze()?;
    println!(
        "frozen at L_low = {:.4}; stable at 1e-4: {}",
        threshold.low().unwrap(),
        threshold.is_stable(1e-4)
    );
    for &loss in &losses[24..30] {
        let skip = threshold.should_skip_backward(loss)?;
        println!("loss {loss:.3}: {}", if skip { "skip backward" } else { "train" });
    }
    assert!(threshold.observe_loss(0.1).is_err());
    Ok(())
}
