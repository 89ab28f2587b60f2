use std::fs::File;
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lossgate::experiment::{self, FlatConfig, SweepSpec};
use lossgate::toy::{self, ToySpec};
use lossgate::trainer;
use lossgate::{load_dataset, Example, Format, Result};

#[derive(Parser)]
#[command(name = "lossgate", version, about = "Loss-gated data filtering for finetuning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train once and write a JSON report.
    Run(RunArgs),
    /// Run a hyperparameter grid and write per-run and summary CSVs.
    Sweep(SweepArgs),
    /// Compare all methods against matched-ratio random skipping.
    Compare(CompareArgs),
    /// Write a synthetic redundant corpus as train/test JSONL.
    GenToy(GenToyArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Training data (.jsonl or .tsv).
    #[arg(long)]
    data: PathBuf,
    /// Evaluation data; defaults to the training data.
    #[arg(long)]
    test: Option<PathBuf>,
    /// Data format, otherwise taken from the file extension.
    #[arg(long)]
    format: Option<Format>,
    /// Skip the first line of TSV files.
    #[arg(long)]
    header: bool,
}

impl DataArgs {
    fn load(&self) -> Result<(Vec<Example>, Vec<Example>)> {
        let read = |p: &Path| load_dataset(p, self.format.unwrap_or_else(|| Format::from_path(p)), self.header);
        let train = read(&self.data)?;
        let test = self.test.as_deref().map(read).transpose()?.unwrap_or_default();
        Ok((train, test))
    }
}

/// Trainer overrides applied on top of `--config`.
#[derive(Args)]
struct ConfigArgs {
    /// Flat TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    n0_fraction: Option<f64>,
    #[arg(long)]
    window_k: Option<usize>,
    #[arg(long)]
    predictor_window: Option<usize>,
    #[arg(long)]
    alt: Option<f64>,
}

impl ConfigArgs {
    fn flat(&self) -> Result<FlatConfig> {
        let mut flat = match &self.config {
            Some(p) => FlatConfig::load(p)?,
            None => FlatConfig::default(),
        };
        macro_rules! over {
            ($($f:ident),*) => { $(if self.$f.is_some() { flat.$f = self.$f; })* };
        }
        over!(
            epochs,
            seed,
            batch_size,
            learning_rate,
            n0_fraction,
            window_k,
            predictor_window,
            alt
        );
        Ok(flat)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    config: ConfigArgs,
    /// three-stage, train-all, auto-threshold, fixed-threshold:T or random-skip:R.
    #[arg(long)]
    mode: Option<String>,
    /// Report path.
    #[arg(long, default_value = "report.json")]
    out: PathBuf,
    /// Per-batch trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Save the final target model weights as JSON.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Save the meta predictor counts as JSON.
    #[arg(long)]
    predictor_checkpoint: Option<PathBuf>,
    #[arg(long)]
    eval_every_epoch: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Sweep spec (flat TOML with grid lists); defaults to the built-in grid.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Comma-separated seeds, overriding the spec.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Comma-separated epoch counts, overriding the spec.
    #[arg(long, value_delimiter = ',')]
    epochs: Option<Vec<usize>>,
    #[arg(long, default_value = "sweep.csv")]
    out: PathBuf,
    /// Summary CSV; defaults to `<out stem>_summary.csv`.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4")]
    seeds: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.3,0.5,0.7")]
    fixed: Vec<f64>,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenToyArgs {
    /// Directory for train.jsonl and test.jsonl.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long)]
    examples: Option<usize>,
    #[arg(long)]
    test_examples: Option<usize>,
    #[arg(long)]
    duplication: Option<usize>,
    #[arg(long)]
    label_noise: Option<f64>,
    #[arg(long)]
    hard_fraction: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let mut flat = args.config.flat()?;
    if args.mode.is_some() {
        flat.mode = args.mode.clone();
    }
    if args.eval_every_epoch {
        flat.eval_every_epoch = Some(true);
    }
    let config = flat.to_config()?;
    let (train, test) = args.data.load()?;
    let outcome = experiment::run_with_reference(&config, &train, &test)?;
    let r = &outcome.report;
    r.write_json(&args.out)?;
    if let Some(path) = &args.trace {
        trainer::write_trace(path, &outcome.trace)?;
    }
    if let Some(path) = &args.checkpoint {
        outcome.model.save(path)?;
    }
    if let Some(path) = &args.predictor_checkpoint {
        outcome.predictor.save(path)?;
    }
    let agot = r.agot.map(|a| format!("{a:.4}")).unwrap_or_else(|| "n/a".into());
    println!(
        "{} accuracy={:.4} alpha_b={:.4} alpha_fb={:.4} T_norm={:.4} agot={} stage={} report={}",
        r.mode,
        r.accuracy,
        r.alpha_b,
        r.alpha_fb,
        r.t_norm,
        agot,
        r.final_stage.index(),
        args.out.display()
    );
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let mut spec = match &args.spec {
        Some(p) => SweepSpec::load(p)?,
        None => SweepSpec::default(),
    };
    if let Some(s) = &args.seeds {
        spec.seeds = s.clone();
    }
    if let Some(e) = &args.epochs {
        spec.epochs = e.clone();
    }
    spec.validate()?;
    let (train, test) = args.data.load()?;
    let result = experiment::run_sweep(&spec, &train, &test)?;
    result.write_rows_csv(BufWriter::new(File::create(&args.out)?))?;
    let summary = args.summary.clone().unwrap_or_else(|| {
        let stem = args.out.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
        args.out.with_file_name(format!("{stem}_summary.csv"))
    });
    result.write_summary_csv(BufWriter::new(File::create(&summary)?))?;
    match result.optimal() {
        Some(best) => println!(
            "{} runs; AGOT-optimal: {} seed={} epochs={} agot={:.4} accuracy={:.4} T_norm={:.4}",
            result.rows.len(),
            best.point.key(),
            best.seed,
            best.epochs,
            best.report.agot.unwrap_or(f64::NAN),
            best.report.accuracy,
            best.report.t_norm
        ),
        None => println!("{} runs; AGOT undefined for every run", result.rows.len()),
    }
    Ok(())
}

fn cmd_compare(args: &CompareArgs) -> Result<()> {
    let config = args.config.flat()?.to_config()?;
    let (train, test) = args.data.load()?;
    let rows = experiment::compare(&config, &train, &test, &args.seeds, &args.fixed)?;
    match &args.out {
        Some(p) => experiment::write_compare_csv(&rows, BufWriter::new(File::create(p)?))?,
        None => experiment::write_compare_csv(&rows, io::stdout().lock())?,
    }
    Ok(())
}

fn cmd_gen_toy(args: &GenToyArgs) -> Result<()> {
    let mut spec = ToySpec::default();
    macro_rules! over {
        ($($f:ident),*) => { $(if let Some(v) = args.$f { spec.$f = v; })* };
    }
    over!(examples, test_examples, duplication, label_noise, hard_fraction, seed);
    let corpus = spec.generate()?;
    std::fs::create_dir_all(&args.out_dir)?;
    let train = args.out_dir.join("train.jsonl");
    let test = args.out_dir.join("test.jsonl");
    toy::write_jsonl(&train, &corpus.train)?;
    toy::write_jsonl(&test, &corpus.test)?;
    println!(
        "wrote {} training examples to {} and {} test examples to {}",
        corpus.train.len(),
        train.display(),
        corpus.test.len(),
        test.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Compare(a) => cmd_compare(a),
        Command::GenToy(a) => cmd_gen_toy(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 3 })
        }
    }
}
