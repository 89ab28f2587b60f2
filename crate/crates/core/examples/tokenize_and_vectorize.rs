//! Tokenize raw text and hash it into the sparse presence vectors shared by
//! the target model and the meta predictor.
//!
//!     cargo run --example tokenize_and_vectorize -- "Some text to hash"

use lossgate::data::{bucket_of, HASH_DIM, PAIR_SEPARATOR};
use lossgate::{tokenize, vectorize, Example};

fn main() -> lossgate::Result<()> {
    let text = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "A good movie, a GOOD movie... and a great one!".to_string());

    let tokens = tokenize(&text);
    println!("text:    {text:?}");
    println!("tokens:  {tokens:?}");
    for t in &tokens {
        println!("  {t:>10} -> bucket {}", bucket_of(t));
    }

    // Repeated tokens collapse to one present bucket.
    let bow = vectorize(&tokens);
    println!("{} distinct buckets out of {HASH_DIM}: {:?}", bow.len(), bow.buckets());

    // Sentence pairs get a separator token between the two halves.
    let pair = Example::pair("is it raining", "the sky is clear", 0)?;
    println!("pair tokens: {:?} (separator {PAIR_SEPARATOR:?})", pair.tokens);
    println!("pair buckets: {}", pair.features().len());
    Ok(())
}
