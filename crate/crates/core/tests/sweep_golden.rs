mod common;

use lossgate::experiment::{run_sweep, SweepSpec, SUMMARY_COLUMNS, SWEEP_COLUMNS};
use lossgate::TrainerConfig;

const GOLDEN_ROWS: &str = include_str!("golden/sweep.csv");
const GOLDEN_SUMMARY: &str = include_str!("golden/sweep_summary.csv");

fn csvs() -> (String, String) {
    let corpus = common::small_corpus(11);
    let spec = SweepSpec {
        base: TrainerConfig {
            window_k: 8,
            ..TrainerConfig::default()
        },
        n0_fractions: vec![0.2],
        predictor_windows: vec![4, 8],
        alts: vec![0.3],
        fixed_thresholds: vec![0.5],
        epochs: vec![1, 2],
        seeds: vec![0, 1],
        max_runs: 100,
    };
    let result = run_sweep(&spec, &corpus.train, &corpus.test).unwrap();
    let (mut rows, mut summary) = (Vec::new(), Vec::new());
    result.write_rows_csv(&mut rows).unwrap();
    result.write_summary_csv(&mut summary).unwrap();
    (String::from_utf8(rows).unwrap(), String::from_utf8(summary).unwrap())
}

#[test]
fn column_order_is_fixed() {
    assert_eq!(GOLDEN_ROWS.lines().next().unwrap(), SWEEP_COLUMNS.join(","));
    assert_eq!(GOLDEN_SUMMARY.lines().next().unwrap(), SUMMARY_COLUMNS.join(","));
}

#[test]
fn sweep_matches_golden_files() {
    let (rows, summary) = csvs();
    if std::env::var_os("LOSSGATE_UPDATE_GOLDEN").is_some() {
        let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden");
        std::fs::write(format!("{dir}/sweep.csv"), &rows).unwrap();
        std::fs::write(format!("{dir}/sweep_summary.csv"), &summary).unwrap();
        return;
    }
    assert_eq!(rows, GOLDEN_ROWS);
    assert_eq!(summary, GOLDEN_SUMMARY);
}
