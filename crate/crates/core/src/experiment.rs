//! Experiment drivers shared by the command-line tool and the examples:
//! flat config files, hyperparameter sweeps, and baseline comparisons.
//!
//! Config files are flat TOML, one key per line:
//!
//! ```toml
//! mode = "three-stage"      # train-all, auto-threshold, fixed-threshold:0.3, random-skip:0.5
//! n0_fraction = 0.3
//! window_k = 64
//! predictor_window = 16
//! alt = 0.3
//! epochs = 1
//! batch_size = 16
//! seed = 0
//! learning_rate = 0.5
//! skip_margin = 1.0
//! variance_tolerance = 1e-4
//! nb_alpha = 1.0
//! batch_policy = "mean"     # or "majority"
//! predictor_enabled = true
//! shuffle = true
//! eval_every_epoch = false
//! t_forward = 1.0
//! t_backward = 2.0
//! epsilon = 0.95
//! p_cpu = 65.0
//! p_dram = 10.0
//! p_gpu = 250.0
//! gpu_count = 1.0
//! time_unit_seconds = 1.0
//! pue = 1.58
//! co2_per_kwh = 0.954
//! ```
//!
//! A sweep file takes the same keys as the base config plus the grid lists
//! `n0_fractions`, `predictor_windows`, `alts`, `fixed_thresholds`,
//! `epochs_list`, `seeds` and the run cap `max_runs`.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Deserialize;

use crate::data::Example;
use crate::error::{Error, Result};
use crate::metapredictor::BatchPolicy;
use crate::trainer::{self, Mode, RunOutcome, RunReport, TrainerConfig};

/// Environment variable capping sweep and compare parallelism.
pub const THREADS_ENV: &str = "LOSSGATE_THREADS";

/// Every key is optional; missing keys keep the value they override.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlatConfig {
    pub mode: Option<String>,
    pub n0_fraction: Option<f64>,
    pub window_k: Option<usize>,
    pub predictor_window: Option<usize>,
    pub alt: Option<f64>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub seed: Option<u64>,
    pub learning_rate: Option<f64>,
    pub skip_margin: Option<f64>,
    pub variance_tolerance: Option<f64>,
    pub nb_alpha: Option<f64>,
    pub batch_policy: Option<BatchPolicy>,
    pub predictor_enabled: Option<bool>,
    pub threshold_override: Option<f64>,
    pub shuffle: Option<bool>,
    pub eval_every_epoch: Option<bool>,
    pub t_forward: Option<f64>,
    pub t_backward: Option<f64>,
    pub epsilon: Option<f64>,
    pub p_cpu: Option<f64>,
    pub p_dram: Option<f64>,
    pub p_gpu: Option<f64>,
    pub gpu_count: Option<f64>,
    pub time_unit_seconds: Option<f64>,
    pub pue: Option<f64>,
    pub co2_per_kwh: Option<f64>,
}

impl FlatConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::InvalidConfig(format!(
                "config file not found: {}",
                path.display()
            )));
        }
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Write every present key over `config`.
    pub fn apply(&self, config: &mut TrainerConfig) -> Result<()> {
        macro_rules! set {
            ($($key:ident => $($target:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$key { config.$($target).+ = v; })*
            };
        }
        if let Some(mode) = &self.mode {
            config.mode = mode.parse()?;
        }
        set!(
            n0_fraction => n0_fraction,
            window_k => window_k,
            predictor_window => predictor_window,
            alt => alt,
            epochs => epochs,
            batch_size => batch_size,
            seed => seed,
            learning_rate => learning_rate,
            skip_margin => skip_margin,
            variance_tolerance => variance_tolerance,
            nb_alpha => nb_alpha,
            batch_policy => batch_policy,
            predictor_enabled => predictor_enabled,
            shuffle => shuffle,
            eval_every_epoch => eval_every_epoch,
            t_forward => timing.t_forward,
            t_backward => timing.t_backward,
            epsilon => epsilon,
            p_cpu => energy.p_cpu,
            p_dram => energy.p_dram,
            p_gpu => energy.p_gpu,
            gpu_count => energy.gpu_count,
            time_unit_seconds => energy.time_unit_seconds,
            pue => energy.pue,
            co2_per_kwh => energy.co2_per_kwh,
        );
        if self.threshold_override.is_some() {
            config.threshold_override = self.threshold_override;
        }
        Ok(())
    }

    pub fn to_config(&self) -> Result<TrainerConfig> {
        let mut config = TrainerConfig::default();
        self.apply(&mut config)?;
        config.validate()?;
        Ok(config)
    }
}

/// Run `config` and, unless it already is full training, a `TrainAll`
/// reference with the same seed and epochs so the report carries AGOT.
pub fn run_with_reference(config: &TrainerConfig, train: &[Example], eval: &[Example]) -> Result<RunOutcome> {
    let mut outcome = trainer::run_detailed(config, train, eval)?;
    if config.mode != Mode::TrainAll {
        let reference = trainer::run(&config.clone().with_mode(Mode::TrainAll), train, eval)?;
        outcome.report.attach_agot(reference.accuracy);
    }
    Ok(outcome)
}

/// Thread pool sized by `LOSSGATE_THREADS` when set, else rayon's default.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let n: usize = raw
            .trim()
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
        if n == 0 {
            return Err(Error::InvalidConfig(format!("{THREADS_ENV} must be at least 1")));
        }
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: TrainerConfig,
    pub n0_fractions: Vec<f64>,
    pub predictor_windows: Vec<usize>,
    pub alts: Vec<f64>,
    /// Each value adds one `FixedThreshold` configuration.
    pub fixed_thresholds: Vec<f64>,
    pub epochs: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Upper bound on the number of runs in the grid.
    pub max_runs: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            base: TrainerConfig::default(),
            n0_fractions: vec![0.1, 0.2, 0.3, 0.4],
            predictor_windows: vec![4, 8, 16],
            alts: vec![0.1, 0.2, 0.3, 0.4, 0.5],
            fixed_thresholds: vec![0.1, 0.3, 0.5, 0.7],
            epochs: vec![1],
            seeds: vec![0],
            max_runs: 10_000,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepGrid {
    n0_fractions: Option<Vec<f64>>,
    predictor_windows: Option<Vec<usize>>,
    alts: Option<Vec<f64>>,
    fixed_thresholds: Option<Vec<f64>>,
    epochs_list: Option<Vec<usize>>,
    seeds: Option<Vec<u64>>,
    max_runs: Option<usize>,
}

const GRID_KEYS: [&str; 7] = [
    "n0_fractions",
    "predictor_windows",
    "alts",
    "fixed_thresholds",
    "epochs_list",
    "seeds",
    "max_runs",
];

/// One point of the grid, before seeds and epochs are applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepPoint {
    ThreeStage {
        n0_fraction: f64,
        predictor_window: usize,
        alt: f64,
    },
    Fixed {
        threshold: f64,
    },
}

impl SweepPoint {
    /// Stable textual key; also the lexicographic tie-break.
    pub fn key(&self) -> String {
        match self {
            SweepPoint::ThreeStage {
                n0_fraction,
                predictor_window,
                alt,
            } => format!("three-stage n0={n0_fraction:.6} w={predictor_window} alt={alt:.6}"),
            SweepPoint::Fixed { threshold } => format!("fixed-threshold t={threshold:.6}"),
        }
    }

    fn configure(&self, base: &TrainerConfig) -> TrainerConfig {
        let mut c = base.clone();
        match *self {
            SweepPoint::ThreeStage {
                n0_fraction,
                predictor_window,
                alt,
            } => {
                c.mode = Mode::ThreeStage;
                c.n0_fraction = n0_fraction;
                c.predictor_window = predictor_window;
                c.alt = alt;
            }
            SweepPoint::Fixed { threshold } => c.mode = Mode::FixedThreshold(threshold),
        }
        c
    }
}

impl SweepSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text)?;
        let mut grid_table = toml::Table::new();
        for key in GRID_KEYS {
            if let Some(v) = table.remove(key) {
                grid_table.insert(key.to_string(), v);
            }
        }
        let grid: SweepGrid = grid_table.try_into()?;
        let flat: FlatConfig = table.try_into()?;
        let mut spec = SweepSpec {
            base: flat.to_config()?,
            ..SweepSpec::default()
        };
        macro_rules! take {
            ($($field:ident => $target:ident),*) => {
                $(if let Some(v) = grid.$field { spec.$target = v; })*
            };
        }
        take!(
            n0_fractions => n0_fractions,
            predictor_windows => predictor_windows,
            alts => alts,
            fixed_thresholds => fixed_thresholds,
            epochs_list => epochs,
            seeds => seeds,
            max_runs => max_runs
        );
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::InvalidConfig(format!(
                "sweep spec not found: {}",
                path.display()
            )));
        }
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Three-stage points (n0 x W x alt, in that nesting order) followed by
    /// the fixed thresholds.
    pub fn points(&self) -> Vec<SweepPoint> {
        let mut points = Vec::new();
        for &n0_fraction in &self.n0_fractions {
            for &predictor_window in &self.predictor_windows {
                for &alt in &self.alts {
                    points.push(SweepPoint::ThreeStage {
                        n0_fraction,
                        predictor_window,
                        alt,
                    });
                }
            }
        }
        points.extend(
            self.fixed_thresholds
                .iter()
                .map(|&threshold| SweepPoint::Fixed { threshold }),
        );
        points
    }

    pub fn run_count(&self) -> usize {
        self.points().len() * self.epochs.len() * self.seeds.len()
    }

    pub fn validate(&self) -> Result<()> {
        let three_stage_empty =
            self.n0_fractions.is_empty() || self.predictor_windows.is_empty() || self.alts.is_empty();
        if (three_stage_empty && self.fixed_thresholds.is_empty()) || self.epochs.is_empty() || self.seeds.is_empty() {
            return Err(Error::EmptyGrid);
        }
        let size = self.run_count();
        if size > self.max_runs {
            return Err(Error::GridTooLarge {
                size,
                cap: self.max_runs,
            });
        }
        for point in self.points() {
            point.configure(&self.base).validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub point: SweepPoint,
    pub epochs: usize,
    pub seed: u64,
    pub report: RunReport,
    pub agot_optimal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummaryRow {
    pub key: String,
    pub epochs: usize,
    pub seeds: usize,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub skip_mean: f64,
    pub t_norm_mean: f64,
    pub agot_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub summary: Vec<SweepSummaryRow>,
}

/// Column order of the per-run sweep CSV.
pub const SWEEP_COLUMNS: [&str; 17] = [
    "config",
    "mode",
    "n0_fraction",
    "predictor_window",
    "alt",
    "fixed_threshold",
    "epochs",
    "seed",
    "accuracy",
    "alpha_b",
    "alpha_fb",
    "skip_ratio",
    "T_norm",
    "agot",
    "final_stage",
    "batches",
    "agot_optimal",
];

/// Column order of the seed-averaged summary CSV.
pub const SUMMARY_COLUMNS: [&str; 8] = [
    "config",
    "epochs",
    "seeds",
    "accuracy_mean",
    "accuracy_std",
    "skip_mean",
    "T_norm_mean",
    "agot_mean",
];

fn f6(x: f64) -> String {
    format!("{x:.6}")
}

fn opt6(x: Option<f64>) -> String {
    x.map(f6).unwrap_or_default()
}

/// Run the whole grid. Each (epochs, seed) pair also gets one `TrainAll`
/// run whose accuracy anchors AGOT; those reference runs are not rows.
pub fn run_sweep(spec: &SweepSpec, train: &[Example], eval: &[Example]) -> Result<SweepResult> {
    spec.validate()?;
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let points = spec.points();
    let anchors: Vec<(usize, u64)> = spec
        .epochs
        .iter()
        .flat_map(|&e| spec.seeds.iter().map(move |&s| (e, s)))
        .collect();
    let jobs: Vec<(SweepPoint, usize, u64)> = points
        .iter()
        .flat_map(|&p| anchors.iter().map(move |&(e, s)| (p, e, s)))
        .collect();

    let pool = thread_pool()?;
    let (references, reports) = pool.install(|| -> Result<_> {
        let references: Vec<f64> = anchors
            .par_iter()
            .map(|&(epochs, seed)| {
                let c = spec
                    .base
                    .clone()
                    .with_mode(Mode::TrainAll)
                    .with_epochs(epochs)
                    .with_seed(seed);
                trainer::run(&c, train, eval).map(|r| r.accuracy)
            })
            .collect::<Result<_>>()?;
        let reports: Vec<RunReport> = jobs
            .par_iter()
            .map(|&(point, epochs, seed)| {
                let c = point.configure(&spec.base).with_epochs(epochs).with_seed(seed);
                trainer::run(&c, train, eval).map(|r| r.without_diagnostics())
            })
            .collect::<Result<_>>()?;
        Ok((references, reports))
    })?;

    let a_full: BTreeMap<(usize, u64), f64> = anchors.iter().copied().zip(references).collect();
    let mut rows: Vec<SweepRow> = jobs
        .into_iter()
        .zip(reports)
        .map(|((point, epochs, seed), mut report)| {
            report.attach_agot(a_full[&(epochs, seed)]);
            SweepRow {
                point,
                epochs,
                seed,
                report,
                agot_optimal: false,
            }
        })
        .collect();
    if let Some(best) = agot_optimal(&rows) {
        rows[best].agot_optimal = true;
    }
    let summary = summarize(&rows);
    Ok(SweepResult { rows, summary })
}

/// Index of the highest-AGOT row; ties go to lower `T_norm`, then to the
/// lexicographically smaller config key, then epochs and seed.
pub fn agot_optimal(rows: &[SweepRow]) -> Option<usize> {
    let better = |a: &SweepRow, b: &SweepRow| {
        let (ga, gb) = (a.report.agot.unwrap_or(f64::NAN), b.report.agot.unwrap_or(f64::NAN));
        gb.total_cmp(&ga)
            .then(a.report.t_norm.total_cmp(&b.report.t_norm))
            .then_with(|| a.point.key().cmp(&b.point.key()))
            .then(a.epochs.cmp(&b.epochs))
            .then(a.seed.cmp(&b.seed))
    };
    rows.iter()
        .enumerate()
        .filter(|(_, r)| r.report.agot.is_some_and(f64::is_finite))
        .min_by(|(_, a), (_, b)| better(a, b))
        .map(|(i, _)| i)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation; 0 for a single value.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

fn summarize(rows: &[SweepRow]) -> Vec<SweepSummaryRow> {
    // grid order of first appearance
    let mut order: Vec<(String, usize)> = Vec::new();
    let mut groups: BTreeMap<(String, usize), Vec<&SweepRow>> = BTreeMap::new();
    for r in rows {
        let k = (r.point.key(), r.epochs);
        if !groups.contains_key(&k) {
            order.push(k.clone());
        }
        groups.entry(k).or_default().push(r);
    }
    order
        .into_iter()
        .map(|k| {
            let g = &groups[&k];
            let acc: Vec<f64> = g.iter().map(|r| r.report.accuracy).collect();
            let skip: Vec<f64> = g.iter().map(|r| r.report.skip_ratio()).collect();
            let tn: Vec<f64> = g.iter().map(|r| r.report.t_norm).collect();
            let agots: Option<Vec<f64>> = g.iter().map(|r| r.report.agot).collect();
            SweepSummaryRow {
                key: k.0,
                epochs: k.1,
                seeds: g.len(),
                accuracy_mean: mean(&acc),
                accuracy_std: std_dev(&acc),
                skip_mean: mean(&skip),
                t_norm_mean: mean(&tn),
                agot_mean: agots.map(|a| mean(&a)),
            }
        })
        .collect()
}

impl SweepResult {
    pub fn optimal(&self) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.agot_optimal)
    }

    pub fn write_rows_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(SWEEP_COLUMNS)?;
        for r in &self.rows {
            let (n0, win, alt, fixed) = match r.point {
                SweepPoint::ThreeStage {
                    n0_fraction,
                    predictor_window,
                    alt,
                } => (f6(n0_fraction), predictor_window.to_string(), f6(alt), String::new()),
                SweepPoint::Fixed { threshold } => (String::new(), String::new(), String::new(), f6(threshold)),
            };
            let rep = &r.report;
            w.write_record([
                r.point.key(),
                rep.mode.clone(),
                n0,
                win,
                alt,
                fixed,
                r.epochs.to_string(),
                r.seed.to_string(),
                f6(rep.accuracy),
                f6(rep.alpha_b),
                f6(rep.alpha_fb),
                f6(rep.skip_ratio()),
                f6(rep.t_norm),
                opt6(rep.agot),
                rep.final_stage.index().to_string(),
                rep.batches_total.to_string(),
                u8::from(r.agot_optimal).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_summary_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(SUMMARY_COLUMNS)?;
        for s in &self.summary {
            w.write_record([
                s.key.clone(),
                s.epochs.to_string(),
                s.seeds.to_string(),
                f6(s.accuracy_mean),
                f6(s.accuracy_std),
                f6(s.skip_mean),
                f6(s.t_norm_mean),
                opt6(s.agot_mean),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// One line of the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub method: String,
    /// For random-skip rows, the method whose realized skip ratio was matched.
    pub matched_to: Option<String>,
    /// Mean over seeds of the random-skip target ratio.
    pub target_ratio: Option<f64>,
    pub seeds: usize,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub t_norm_mean: f64,
    pub t_norm_std: f64,
    pub skip_mean: f64,
    pub agot_mean: Option<f64>,
}

pub const COMPARE_COLUMNS: [&str; 10] = [
    "method",
    "matched_to",
    "target_ratio",
    "seeds",
    "accuracy_mean",
    "accuracy_std",
    "T_norm_mean",
    "T_norm_std",
    "skip_mean",
    "agot_mean",
];

/// Methods compared by [`compare`], in output order (random-skip controls
/// are appended after them).
pub fn compare_methods(fixed_thresholds: &[f64]) -> Vec<Mode> {
    let mut modes = vec![Mode::ThreeStage, Mode::AutoThresholdOnly];
    modes.extend(fixed_thresholds.iter().map(|&t| Mode::FixedThreshold(t)));
    modes.push(Mode::TrainAll);
    modes
}

// A run that skipped everything is matched by the largest legal ratio.
const MAX_RANDOM_RATIO: f64 = 1.0 - 1e-9;

/// Run every method on each seed, then a `RandomSkip` control for each
/// skipping method, matched per seed to that method's realized skip ratio.
pub fn compare(
    base: &TrainerConfig,
    train: &[Example],
    eval: &[Example],
    seeds: &[u64],
    fixed_thresholds: &[f64],
) -> Result<Vec<CompareRow>> {
    if seeds.is_empty() {
        return Err(Error::InvalidConfig("compare needs at least one seed".into()));
    }
    let methods = compare_methods(fixed_thresholds);
    let jobs: Vec<(Mode, u64)> = methods
        .iter()
        .flat_map(|&m| seeds.iter().map(move |&s| (m, s)))
        .collect();
    let pool = thread_pool()?;
    let reports: Vec<RunReport> = pool.install(|| {
        jobs.par_iter()
            .map(|&(mode, seed)| trainer::run(&base.clone().with_mode(mode).with_seed(seed), train, eval))
            .collect::<Result<_>>()
    })?;
    // reports are grouped by method, seeds in order
    let by_method: Vec<&[RunReport]> = reports.chunks(seeds.len()).collect();
    let full_index = methods
        .iter()
        .position(|m| *m == Mode::TrainAll)
        .expect("TrainAll is always compared");
    let a_full: Vec<f64> = by_method[full_index].iter().map(|r| r.accuracy).collect();

    let controls: Vec<(usize, u64, f64)> = methods
        .iter()
        .enumerate()
        .filter(|(_, m)| **m != Mode::TrainAll)
        .flat_map(|(i, _)| {
            by_method[i]
                .iter()
                .zip(seeds)
                .map(move |(r, &s)| (i, s, r.skip_ratio().min(MAX_RANDOM_RATIO)))
        })
        .collect();
    let random: Vec<RunReport> = pool.install(|| {
        controls
            .par_iter()
            .map(|&(_, seed, ratio)| trainer::run_random_skip(&base.clone().with_seed(seed), train, eval, ratio))
            .collect::<Result<_>>()
    })?;

    let row = |method: String, matched_to: Option<String>, target: Option<f64>, group: &[RunReport]| {
        let with_agot: Vec<RunReport> = group
            .iter()
            .zip(&a_full)
            .map(|(r, &a)| {
                let mut r = r.clone();
                r.attach_agot(a);
                r
            })
            .collect();
        let acc: Vec<f64> = group.iter().map(|r| r.accuracy).collect();
        let tn: Vec<f64> = group.iter().map(|r| r.t_norm).collect();
        let skip: Vec<f64> = group.iter().map(|r| r.skip_ratio()).collect();
        let agots: Option<Vec<f64>> = with_agot.iter().map(|r| r.agot).collect();
        CompareRow {
            method,
            matched_to,
            target_ratio: target,
            seeds: group.len(),
            accuracy_mean: mean(&acc),
            accuracy_std: std_dev(&acc),
            t_norm_mean: mean(&tn),
            t_norm_std: std_dev(&tn),
            skip_mean: mean(&skip),
            agot_mean: agots.map(|a| mean(&a)),
        }
    };

    let mut rows: Vec<CompareRow> = methods
        .iter()
        .zip(&by_method)
        .map(|(m, g)| row(m.to_string(), None, None, g))
        .collect();
    for (k, group) in random.chunks(seeds.len()).enumerate() {
        let (method_index, _, _) = controls[k * seeds.len()];
        let ratios: Vec<f64> = controls[k * seeds.len()..(k + 1) * seeds.len()]
            .iter()
            .map(|c| c.2)
            .collect();
        rows.push(row(
            "random-skip".into(),
            Some(methods[method_index].to_string()),
            Some(mean(&ratios)),
            group,
        ));
    }
    Ok(rows)
}

pub fn write_compare_csv<W: Write>(rows: &[CompareRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COMPARE_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.method.clone(),
            r.matched_to.clone().unwrap_or_default(),
            opt6(r.target_ratio),
            r.seeds.to_string(),
            f6(r.accuracy_mean),
            f6(r.accuracy_std),
            f6(r.t_norm_mean),
            f6(r.t_norm_std),
            f6(r.skip_mean),
            opt6(r.agot_mean),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toy::ToySpec;

    fn corpus() -> (Vec<Example>, Vec<Example>) {
        let c = ToySpec {
            examples: 600,
            test_examples: 200,
            ..ToySpec::default()
        }
        .generate()
        .unwrap();
        (c.train, c.test)
    }

    fn tiny_spec() -> SweepSpec {
        SweepSpec {
            base: TrainerConfig {
                window_k: 8,
                ..TrainerConfig::default()
            },
            n0_fractions: vec![0.2],
            predictor_windows: vec![4],
            alts: vec![0.3],
            fixed_thresholds: vec![0.5],
            epochs: vec![1],
            seeds: vec![1, 2],
            max_runs: 100,
        }
    }

    #[test]
    fn flat_config_overrides_and_rejects_unknown_keys() {
        let flat = FlatConfig::from_toml(
            "mode = \"fixed-threshold:0.3\"\nalt = 0.2\nt_backward = 3.0\nbatch_policy = \"majority\"\n",
        )
        .unwrap();
        let c = flat.to_config().unwrap();
        assert_eq!(c.mode, Mode::FixedThreshold(0.3));
        assert_eq!(c.alt, 0.2);
        assert_eq!(c.timing.t_backward, 3.0);
        assert_eq!(c.batch_policy, BatchPolicy::Majority);
        assert_eq!(c.window_k, TrainerConfig::default().window_k);
        assert!(FlatConfig::from_toml("altt = 0.2").is_err());
        assert!(FlatConfig::from_toml("alt = -1.0").unwrap().to_config().is_err());
    }

    #[test]
    fn sweep_spec_from_toml() {
        let spec = SweepSpec::from_toml("seeds = [3, 4]\nalts = [0.1]\nepochs = 2\nmax_runs = 50\n").unwrap();
        assert_eq!(spec.seeds, vec![3, 4]);
        assert_eq!(spec.alts, vec![0.1]);
        assert_eq!(spec.base.epochs, 2);
        assert_eq!(spec.run_count(), (4 * 3 + 4) * 2);
        assert!(SweepSpec::from_toml("sedes = [1]").is_err());
    }

    #[test]
    fn default_grid_size_and_cap() {
        let spec = SweepSpec::default();
        assert_eq!(spec.points().len(), 4 * 3 * 5 + 4);
        spec.validate().unwrap();
        let capped = SweepSpec {
            max_runs: 10,
            ..spec.clone()
        };
        assert!(matches!(
            capped.validate(),
            Err(Error::GridTooLarge { size: 64, cap: 10 })
        ));
        let empty = SweepSpec { seeds: vec![], ..spec };
        assert!(matches!(empty.validate(), Err(Error::EmptyGrid)));
    }

    #[test]
    fn two_configs_two_seeds() {
        let (train, test) = corpus();
        let result = run_sweep(&tiny_spec(), &train, &test).unwrap();
        assert_eq!(result.rows.len(), 4);
        assert_eq!(result.summary.len(), 2);
        assert!(result.summary.iter().all(|s| s.seeds == 2));
        assert_eq!(result.rows.iter().filter(|r| r.agot_optimal).count(), 1);
        let best = result.optimal().unwrap().report.agot.unwrap();
        assert!(result.rows.iter().all(|r| r.report.agot.unwrap() <= best));
    }

    fn row_with(point: SweepPoint, agot: f64, t_norm: f64) -> SweepRow {
        let (train, _) = corpus();
        let mut report = trainer::run(&TrainerConfig::default(), &train[..32], &[]).unwrap();
        report.agot = Some(agot);
        report.t_norm = t_norm;
        SweepRow {
            point,
            epochs: 1,
            seed: 0,
            report,
            agot_optimal: false,
        }
    }

    #[test]
    fn tie_breaks() {
        let a = SweepPoint::Fixed { threshold: 0.3 };
        let b = SweepPoint::Fixed { threshold: 0.1 };
        let rows = vec![row_with(a, 0.9, 0.5), row_with(b, 0.9, 0.4), row_with(a, 0.8, 0.1)];
        assert_eq!(agot_optimal(&rows), Some(1));
        let rows = vec![row_with(a, 0.9, 0.4), row_with(b, 0.9, 0.4)];
        assert_eq!(agot_optimal(&rows), Some(1));
    }

    #[test]
    fn csv_columns_are_fixed() {
        let (train, test) = corpus();
        let result = run_sweep(&tiny_spec(), &train, &test).unwrap();
        let mut buf = Vec::new();
        result.write_rows_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), SWEEP_COLUMNS.join(","));
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn compare_rows() {
        let (train, test) = corpus();
        let base = TrainerConfig {
            window_k: 8,
            ..TrainerConfig::default()
        };
        let rows = compare(&base, &train, &test, &[0, 1], &[0.3]).unwrap();
        let names: Vec<&str> = rows.iter().map(|r| r.method.as_str()).collect();
        assert_eq!(
            names,
            [
                "three-stage",
                "auto-threshold",
                "fixed-threshold:0.3",
                "train-all",
                "random-skip",
                "random-skip",
                "random-skip"
            ]
        );
        let full = &rows[3];
        assert_eq!(full.t_norm_mean, 1.0);
        assert_eq!(full.agot_mean, Some(1.0));
        let control = &rows[4];
        assert_eq!(control.matched_to.as_deref(), Some("three-stage"));
        assert!((control.target_ratio.unwrap() - rows[0].skip_mean).abs() < 1e-12);
    }
}
