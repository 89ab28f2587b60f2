//! The Bernoulli Naive Bayes meta predictor: learns from bag-of-words
//! features which examples still produce high loss, then decides whether a
//! whole batch is worth a forward pass.

use lossgate::metapredictor::BatchPolicy;
use lossgate::{make_label, Example, NaiveBayesModel};

fn main() -> lossgate::Result<()> {
    let threshold = 0.4;
    // (text, observed batch loss) pairs as they would arrive in training.
    let seen = [
        ("ambiguous sarcastic review", 0.9),
        ("subtle irony in this review", 0.7),
        ("great great great", 0.05),
        ("terrible awful terrible", 0.08),
        ("sarcastic praise, ambiguous ending", 0.8),
        ("great movie", 0.1),
    ];

    let mut nb = NaiveBayesModel::new(1.0);
    for (text, loss) in seen {
        let e = Example::new(text, 0)?;
        let label = make_label(loss, threshold);
        if nb.total() > 0 {
            let lmp = nb.predictor_loss(&[e.features()], &[label])?;
            println!("{text:<38} label {label}  predictor loss before update {lmp:.3}");
        }
        nb.update([e.features()], label);
    }

    println!(
        "class counts {:?}, vocabulary {}",
        nb.class_counts(),
        nb.vocabulary().len()
    );
    for text in [
        "a sarcastic and ambiguous take",
        "great great movie",
        "an unseen sentence",
    ] {
        let e = Example::new(text, 0)?;
        println!("P(train-worthy | {text:?}) = {:.3}", nb.posterior(e.features())?);
    }

    let batch: Vec<Example> = ["great movie", "great great", "ambiguous review"]
        .iter()
        .map(|t| Example::new(*t, 0))
        .collect::<Result<_, _>>()?;
    let features: Vec<_> = batch.iter().map(|e| e.features()).collect();
    for policy in [BatchPolicy::Mean, BatchPolicy::Majority] {
        let p = nb.predict_batch(&features, policy);
        println!(
            "{policy:?}: decision {} (mean posterior {:.3})",
            p.decision,
            p.mean_p1.unwrap()
        );
    }
    Ok(())
}
