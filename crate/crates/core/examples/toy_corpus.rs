//! Generate the synthetic redundant corpus and write it as JSONL.
//!
//!     cargo run --example toy_corpus -- /tmp/toy

use std::path::PathBuf;

use lossgate::toy::{write_jsonl, ToySpec};

fn main() -> lossgate::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    let spec = ToySpec {
        examples: 5_000,
        test_examples: 1_000,
        seed: 42,
        ..ToySpec::default()
    };
    let corpus = spec.generate()?;

    let mut unique: Vec<&str> = corpus.train.iter().map(|e| e.text.as_str()).collect();
    unique.sort_unstable();
    unique.dedup();
    let positives = corpus.train.iter().filter(|e| e.label == 1).count();
    println!(
        "{} training examples ({} unique, duplication {}), {positives} labelled positive",
        corpus.train.len(),
        unique.len(),
        spec.duplication
    );
    for e in corpus.train.iter().take(3) {
        println!("  [{}] {}", e.label, e.text);
    }

    std::fs::create_dir_all(&dir)?;
    write_jsonl(&dir.join("train.jsonl"), &corpus.train)?;
    write_jsonl(&dir.join("test.jsonl"), &corpus.test)?;
    println!("wrote {}/{{train,test}}.jsonl", dir.display());
    Ok(())
}
