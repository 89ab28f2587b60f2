//! Dataset ingestion, tokenization, hashed Bag-of-Words features and
//! minibatch assembly.
//!
//! Features are Bernoulli presence bits over a fixed hash space of
//! [`HASH_DIM`] buckets. Every [`Example`] carries its feature vector so the
//! trainer and the meta predictor never re-hash text.

use std::fs::File;
use std::hash::Hasher;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use fnv::FnvHasher;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::{Error, Result};

/// log2 of the hash space size.
pub const HASH_BITS: u32 = 18;
/// Number of feature buckets.
pub const HASH_DIM: usize = 1 << HASH_BITS;

/// Token inserted between the two halves of a sentence-pair record.
pub const PAIR_SEPARATOR: &str = "[sep]";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Jsonl,
    Tsv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "json" => Ok(Format::Jsonl),
            "tsv" => Ok(Format::Tsv),
            other => Err(Error::InvalidConfig(format!("unknown data format `{other}`"))),
        }
    }
}

impl Format {
    /// Guess the format from a file extension, defaulting to JSONL.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("tsv") => Format::Tsv,
            _ => Format::Jsonl,
        }
    }
}

/// Set of present buckets, sorted ascending with no duplicates.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct BowVector {
    buckets: Vec<u32>,
}

impl BowVector {
    pub fn from_buckets(mut buckets: Vec<u32>) -> Self {
        buckets.retain(|&b| (b as usize) < HASH_DIM);
        buckets.sort_unstable();
        buckets.dedup();
        BowVector { buckets }
    }

    pub fn buckets(&self) -> &[u32] {
        &self.buckets
    }

    pub fn contains(&self, bucket: u32) -> bool {
        self.buckets.binary_search(&bucket).is_ok()
    }

    pub fn len(&self) -> usize {
        self.buckets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buckets.is_empty()
    }

    pub const fn dimension(&self) -> usize {
        HASH_DIM
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub text: String,
    pub tokens: Vec<String>,
    pub label: u8,
    features: BowVector,
}

impl Example {
    /// Build an example from raw text. Labels outside {0, 1} are rejected.
    pub fn new(text: impl Into<String>, label: u8) -> Result<Self> {
        let text = text.into();
        let tokens = tokenize(&text);
        Self::from_tokens(text, tokens, label)
    }

    pub fn from_tokens(text: String, tokens: Vec<String>, label: u8) -> Result<Self> {
        if label > 1 {
            return Err(Error::LabelOutOfRange {
                line: 0,
                label: label.into(),
            });
        }
        let features = vectorize(&tokens);
        Ok(Example {
            text,
            tokens,
            label,
            features,
        })
    }

    /// A sentence pair, joined with [`PAIR_SEPARATOR`].
    pub fn pair(first: &str, second: &str, label: u8) -> Result<Self> {
        let mut tokens = tokenize(first);
        tokens.push(PAIR_SEPARATOR.to_string());
        tokens.extend(tokenize(second));
        Self::from_tokens(format!("{first}\t{second}"), tokens, label)
    }

    pub fn features(&self) -> &BowVector {
        &self.features
    }
}

#[derive(Debug, Clone)]
pub struct MiniBatch<'a> {
    pub ordinal: usize,
    pub examples: Vec<&'a Example>,
}

impl<'a> MiniBatch<'a> {
    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn features(&self) -> Vec<&'a BowVector> {
        self.examples.iter().map(|e| e.features()).collect()
    }
}

/// Lowercase, split on anything that is not alphanumeric, drop the separators.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// 64-bit FNV-1a over the token's UTF-8 bytes, reduced modulo [`HASH_DIM`].
pub fn bucket_of(token: &str) -> u32 {
    let mut hasher = FnvHasher::default();
    hasher.write(token.as_bytes());
    (hasher.finish() % HASH_DIM as u64) as u32
}

pub fn vectorize<S: AsRef<str>>(tokens: &[S]) -> BowVector {
    BowVector::from_buckets(tokens.iter().map(|t| bucket_of(t.as_ref())).collect())
}

#[derive(Deserialize)]
struct JsonRecord {
    text: String,
    label: serde_json::Value,
    #[serde(default)]
    text_b: Option<String>,
}

fn parse_label(raw: &str, line: usize) -> Result<u8> {
    let value: i64 = raw.trim().parse().map_err(|_| Error::MalformedRecord {
        line,
        reason: format!("label `{}` is not an integer", raw.trim()),
    })?;
    check_label(value, line)
}

fn check_label(value: i64, line: usize) -> Result<u8> {
    match value {
        0 | 1 => Ok(value as u8),
        label => Err(Error::LabelOutOfRange { line, label }),
    }
}

fn parse_jsonl_line(raw: &str, line: usize) -> Result<Example> {
    let record: JsonRecord = serde_json::from_str(raw).map_err(|e| Error::MalformedRecord {
        line,
        reason: e.to_string(),
    })?;
    let label = match &record.label {
        serde_json::Value::Number(n) => match n.as_i64() {
            Some(v) => check_label(v, line)?,
            None => {
                return Err(Error::MalformedRecord {
                    line,
                    reason: format!("label `{n}` is not an integer"),
                })
            }
        },
        other => {
            return Err(Error::MalformedRecord {
                line,
                reason: format!("label `{other}` is not an integer"),
            })
        }
    };
    match record.text_b {
        Some(second) => Example::pair(&record.text, &second, label),
        None => Example::new(record.text, label),
    }
}

fn parse_tsv_line(raw: &str, line: usize) -> Result<Example> {
    let mut cols: Vec<&str> = raw.split('\t').collect();
    match cols.len() {
        2 => Example::new(cols[0], parse_label(cols[1], line)?),
        3 => {
            let label = parse_label(cols.pop().unwrap(), line)?;
            Example::pair(cols[0], cols[1], label)
        }
        n => Err(Error::MalformedRecord {
            line,
            reason: format!("expected 2 or 3 tab-separated columns, found {n}"),
        }),
    }
}

/// Load examples in file order. Blank lines are ignored; `skip_header` drops
/// the first line of a TSV file. Line numbers in errors are 1-based.
pub fn load_dataset(path: &Path, format: Format, skip_header: bool) -> Result<Vec<Example>> {
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::DatasetNotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    let reader = BufReader::new(file);
    let mut examples = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if idx == 0 && skip_header && format == Format::Tsv {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let example = match format {
            Format::Jsonl => parse_jsonl_line(&line, line_no),
            Format::Tsv => parse_tsv_line(&line, line_no),
        }?;
        examples.push(example);
    }
    Ok(examples)
}

/// Split `examples` into consecutive batches of at most `batch_size`, after an
/// optional seeded shuffle. The final batch may be short.
pub fn make_batches(examples: &[Example], batch_size: usize, seed: u64, shuffle: bool) -> Result<Vec<MiniBatch<'_>>> {
    if batch_size == 0 {
        return Err(Error::ZeroBatchSize);
    }
    if examples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut order: Vec<usize> = (0..examples.len()).collect();
    if shuffle {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        order.shuffle(&mut rng);
    }
    Ok(order
        .chunks(batch_size)
        .enumerate()
        .map(|(ordinal, chunk)| MiniBatch {
            ordinal,
            examples: chunk.iter().map(|&i| &examples[i]).collect(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(contents: &str, suffix: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(suffix).tempfile().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("Good, GREAT movie!"), vec!["good", "great", "movie"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("a  b"), vec!["a", "b"]);
        assert!(tokenize("  ,.! ").is_empty());
    }

    #[test]
    fn vectorize_set_semantics() {
        let v = vectorize(&["x", "x", "y"]);
        let expected = if bucket_of("x") == bucket_of("y") { 1 } else { 2 };
        assert_eq!(v.len(), expected);
        assert!(vectorize::<&str>(&[]).is_empty());
    }

    // Golden values from an independent FNV-1a 64 implementation
    // (offset 0xcbf29ce484222325, prime 0x100000001b3), reduced mod 2^18.
    #[test]
    fn vectorize_golden_buckets() {
        assert_eq!(bucket_of("good"), GOOD_BUCKET);
        assert_eq!(bucket_of("movie"), MOVIE_BUCKET);
        let v = vectorize(&["good", "movie"]);
        let mut expected = vec![GOOD_BUCKET, MOVIE_BUCKET];
        expected.sort_unstable();
        assert_eq!(v.buckets(), expected.as_slice());
        assert!(v.buckets().iter().all(|&b| (b as usize) < v.dimension()));
    }

    const GOOD_BUCKET: u32 = 37144;
    const MOVIE_BUCKET: u32 = 115471;

    #[test]
    fn jsonl_record_maps_fields() {
        let f = write_tmp("{\"text\":\"good movie\",\"label\":1}\n", ".jsonl");
        let ex = load_dataset(f.path(), Format::Jsonl, false).unwrap();
        assert_eq!(ex.len(), 1);
        assert_eq!(ex[0].tokens, vec!["good", "movie"]);
        assert_eq!(ex[0].label, 1);
    }

    #[test]
    fn tsv_record_maps_fields() {
        let f = write_tmp("bad plot\t0\n", ".tsv");
        let ex = load_dataset(f.path(), Format::Tsv, false).unwrap();
        assert_eq!(ex[0].tokens, vec!["bad", "plot"]);
        assert_eq!(ex[0].label, 0);
    }

    #[test]
    fn tsv_header_is_skipped_on_request() {
        let f = write_tmp("text\tlabel\nbad plot\t0\n", ".tsv");
        assert!(load_dataset(f.path(), Format::Tsv, false).is_err());
        let ex = load_dataset(f.path(), Format::Tsv, true).unwrap();
        assert_eq!(ex.len(), 1);
    }

    #[test]
    fn label_out_of_range_is_rejected() {
        let f = write_tmp("{\"text\":\"a\",\"label\":0}\n{\"text\":\"b\",\"label\":3}\n", ".jsonl");
        let err = load_dataset(f.path(), Format::Jsonl, false).unwrap_err();
        assert!(matches!(err, Error::LabelOutOfRange { line: 2, label: 3 }));
        assert!(err.to_string().contains("label out of range"));
    }

    #[test]
    fn malformed_record_names_line() {
        let f = write_tmp("ok text\t1\nbroken line\n", ".tsv");
        let err = load_dataset(f.path(), Format::Tsv, false).unwrap_err();
        assert!(matches!(err, Error::MalformedRecord { line: 2, .. }));
        assert!(err.to_string().starts_with("line 2"));
    }

    #[test]
    fn sentence_pairs_are_concatenated() {
        let f = write_tmp("{\"text\":\"is it\",\"text_b\":\"yes it is\",\"label\":1}\n", ".jsonl");
        let ex = load_dataset(f.path(), Format::Jsonl, false).unwrap();
        assert_eq!(ex[0].tokens, vec!["is", "it", PAIR_SEPARATOR, "yes", "it", "is"]);
    }

    #[test]
    fn missing_file_is_reported() {
        let err = load_dataset(Path::new("/nonexistent/x.jsonl"), Format::Jsonl, false).unwrap_err();
        assert!(matches!(err, Error::DatasetNotFound(_)));
    }

    fn numbered(n: usize) -> Vec<Example> {
        (0..n)
            .map(|i| Example::new(format!("tok{i}"), (i % 2) as u8).unwrap())
            .collect()
    }

    #[test]
    fn batches_use_ceiling_division() {
        let ex = numbered(10);
        let batches = make_batches(&ex, 4, 0, true).unwrap();
        let sizes: Vec<usize> = batches.iter().map(MiniBatch::len).collect();
        assert_eq!(sizes, vec![4, 4, 2]);
        let ordinals: Vec<usize> = batches.iter().map(|b| b.ordinal).collect();
        assert_eq!(ordinals, vec![0, 1, 2]);
    }

    #[test]
    fn unshuffled_batches_keep_file_order() {
        let ex = numbered(7);
        let batches = make_batches(&ex, 3, 99, false).unwrap();
        let texts: Vec<&str> = batches
            .iter()
            .flat_map(|b| b.examples.iter().map(|e| e.text.as_str()))
            .collect();
        let expected: Vec<String> = (0..7).map(|i| format!("tok{i}")).collect();
        assert_eq!(texts, expected);
    }

    #[test]
    fn same_seed_same_permutation() {
        let ex = numbered(50);
        let order = |seed| -> Vec<String> {
            make_batches(&ex, 8, seed, true)
                .unwrap()
                .iter()
                .flat_map(|b| b.examples.iter().map(|e| e.text.clone()))
                .collect()
        };
        assert_eq!(order(5), order(5));
        assert_ne!(order(5), order(6));
    }

    #[test]
    fn zero_batch_size_is_an_error() {
        let ex = numbered(3);
        assert!(matches!(make_batches(&ex, 0, 0, false), Err(Error::ZeroBatchSize)));
        assert!(matches!(make_batches(&[], 2, 0, false), Err(Error::EmptyDataset)));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn tokenizer_is_idempotent(text in "\\PC{0,60}") {
                let once = tokenize(&text);
                let twice = tokenize(&once.join(" "));
                prop_assert_eq!(once, twice);
            }

            #[test]
            fn batches_partition_examples(n in 1usize..80, bs in 1usize..20, seed: u64, shuffle: bool) {
                let ex = numbered(n);
                let batches = make_batches(&ex, bs, seed, shuffle).unwrap();
                let mut seen: Vec<&str> = batches
                    .iter()
                    .flat_map(|b| b.examples.iter().map(|e| e.text.as_str()))
                    .collect();
                seen.sort_unstable();
                let mut all: Vec<&str> = ex.iter().map(|e| e.text.as_str()).collect();
                all.sort_unstable();
                prop_assert_eq!(seen, all);
                prop_assert!(batches.iter().all(|b| !b.is_empty() && b.len() <= bs));
            }

            #[test]
            fn vectorize_is_stable(tokens in proptest::collection::vec("[a-z]{1,8}", 0..20)) {
                let a = vectorize(&tokens);
                let b = vectorize(&tokens);
                prop_assert_eq!(&a, &b);
                prop_assert!(a.buckets().windows(2).all(|w| w[0] < w[1]));
            }
        }
    }
}
