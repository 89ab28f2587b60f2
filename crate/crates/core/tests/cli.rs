use std::path::Path;
use std::process::{Command, Output};

fn lossgate(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lossgate"))
        .args(args)
        .current_dir(dir)
        .env("LOSSGATE_THREADS", "2")
        .output()
        .unwrap()
}

fn toy(dir: &Path) {
    let out = lossgate(
        &[
            "gen-toy",
            "--out-dir",
            ".",
            "--examples",
            "1500",
            "--test-examples",
            "300",
            "--seed",
            "4",
        ],
        dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn report(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn run_writes_report_with_all_metric_fields() {
    let dir = tempfile::tempdir().unwrap();
    toy(dir.path());
    let out = lossgate(
        &[
            "run",
            "--mode",
            "three-stage",
            "--data",
            "train.jsonl",
            "--test",
            "test.jsonl",
            "--epochs",
            "2",
            "--seed",
            "7",
            "--window-k",
            "8",
            "--trace",
            "trace.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("three-stage accuracy="));
    let r = report(&dir.path().join("report.json"));
    for key in [
        "accuracy",
        "alpha_b",
        "alpha_fb",
        "T",
        "T_norm",
        "agot",
        "p_t",
        "co2e",
        "stage_boundaries",
        "config",
    ] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    assert_eq!(r["config"]["epochs"], 2);
    assert_eq!(r["config"]["seed"], 7);
    assert!(r["agot"].is_f64());
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count() as u64, r["batches_total"].as_u64().unwrap());
}

#[test]
fn train_all_has_no_skips() {
    let dir = tempfile::tempdir().unwrap();
    toy(dir.path());
    let out = lossgate(
        &[
            "run",
            "--mode",
            "train-all",
            "--data",
            "train.jsonl",
            "--out",
            "all.json",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let r = report(&dir.path().join("all.json"));
    assert_eq!(r["alpha_b"], 0.0);
    assert_eq!(r["alpha_fb"], 0.0);
    assert_eq!(r["T_norm"], 1.0);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    toy(dir.path());
    std::fs::write(
        dir.path().join("c.toml"),
        "mode = \"auto-threshold\"\nwindow_k = 8\nepochs = 3\n",
    )
    .unwrap();
    let out = lossgate(
        &["run", "--config", "c.toml", "--epochs", "1", "--data", "train.jsonl"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&dir.path().join("report.json"));
    assert_eq!(r["mode"], "auto-threshold");
    assert_eq!(r["config"]["window_k"], 8);
    assert_eq!(r["config"]["epochs"], 1);
    assert_eq!(r["alpha_fb"], 0.0);
}

#[test]
fn missing_dataset_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = lossgate(&["run", "--data", "nope.jsonl"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dataset not found"));
}

#[test]
fn bad_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    toy(dir.path());
    std::fs::write(dir.path().join("bad.toml"), "alt = -0.5\n").unwrap();
    let out = lossgate(&["run", "--config", "bad.toml", "--data", "train.jsonl"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = lossgate(&["run", "--mode", "sideways", "--data", "train.jsonl"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = lossgate(&["frobnicate"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tsv_with_header() {
    let dir = tempfile::tempdir().unwrap();
    let mut tsv = String::from("text\tlabel\n");
    for i in 0..64 {
        tsv.push_str(&format!("great movie number {i}\t1\nawful film number {i}\t0\n"));
    }
    std::fs::write(dir.path().join("d.tsv"), tsv).unwrap();
    let out = lossgate(&["run", "--data", "d.tsv", "--header", "--window-k", "4"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = lossgate(&["run", "--data", "d.tsv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_is_byte_identical_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    toy(dir.path());
    std::fs::write(
        dir.path().join("s.toml"),
        "window_k = 8\nn0_fractions = [0.2, 0.3]\npredictor_windows = [4]\nalts = [0.2, 0.4]\nfixed_thresholds = [0.3]\nseeds = [0, 1]\n",
    )
    .unwrap();
    let args = [
        "sweep",
        "--spec",
        "s.toml",
        "--data",
        "train.jsonl",
        "--test",
        "test.jsonl",
    ];
    let first = lossgate(&[&args[..], &["--out", "a.csv"]].concat(), dir.path());
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let second = lossgate(&[&args[..], &["--out", "b.csv"]].concat(), dir.path());
    assert!(second.status.success());
    let read = |f: &str| std::fs::read(dir.path().join(f)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    assert_eq!(read("a_summary.csv"), read("b_summary.csv"));
    let rows = String::from_utf8(read("a.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 5 * 2);
    assert_eq!(rows.lines().filter(|l| l.ends_with(",1")).count(), 1);
}

#[test]
fn oversized_sweep_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    toy(dir.path());
    std::fs::write(dir.path().join("s.toml"), "max_runs = 3\n").unwrap();
    let out = lossgate(&["sweep", "--spec", "s.toml", "--data", "train.jsonl"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap is 3"));
}

#[test]
fn compare_matches_random_skip_to_three_stage() {
    let dir = tempfile::tempdir().unwrap();
    toy(dir.path());
    let out = lossgate(
        &[
            "compare",
            "--data",
            "train.jsonl",
            "--test",
            "test.jsonl",
            "--seeds",
            "0,1",
            "--window-k",
            "8",
            "--fixed",
            "0.5",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    let ts = rows.iter().find(|r| &r[0] == "three-stage").unwrap();
    let ctrl = rows
        .iter()
        .find(|r| &r[0] == "random-skip" && &r[1] == "three-stage")
        .unwrap();
    assert_eq!(&ctrl[2], &ts[8]);
    let all = rows.iter().find(|r| &r[0] == "train-all").unwrap();
    assert_eq!(&all[6], "1.000000");
    assert!(rows.iter().all(|r| !r[5].is_empty()));
}
