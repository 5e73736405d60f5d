//! The `pepita` command line: `train`, `eval`, `verify-linear`, `fetch-data`.
//!
//! Exit codes: 0 success, 1 verification thresholds not met, 2 invalid usage
//! or configuration, 3 inconclusive verification, 4 divergence, 5 any other
//! runtime failure (I/O, data format, checksum, shape). Failures print one
//! JSON object on stderr.

mod fetch;
mod manifest;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::datasets::LabeledDataset;
use crate::error::{Error, Result};
use crate::lindyn::{sweep, write_sweep_csv, LinDims, SweepConfig, Thresholds, Verdict};
use crate::trainer::{evaluate, run_experiment, Checkpoint};

pub use fetch::{fetch_dataset, fetch_files, remote_files, sha256_file, DatasetId, Downloader, FetchReport, HttpDownloader, RemoteFile};
pub use manifest::{dataset_files, DatasetSection, DatasetSource, Manifest, DATA_DIR_ENV, MANIFEST_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_DIVERGED: i32 = 4;
pub const EXIT_RUNTIME: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "pepita", version, about = "Forward-only learning experiments")]
pub struct Cli {
    /// Worker threads for per-sample work (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model described by a JSON manifest.
    Train(TrainArgs),
    /// Evaluate a checkpoint on a dataset split.
    Eval(EvalArgs),
    /// Seed sweep of the linear-network dynamics checks.
    VerifyLinear(VerifyArgs),
    /// Download and unpack a dataset.
    FetchData(FetchArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Overrides the manifest seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the manifest epoch count.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Base directory for the run directory (default: the manifest's `output_dir`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Single thread and no wall-clock values in the metrics file.
    #[arg(long)]
    pub exact_repro: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Dataset id: mnist, cifar10, cifar100 or cifar100-coarse. Defaults to
    /// the dataset recorded in the checkpoint.
    #[arg(long)]
    pub dataset: Option<String>,
    #[arg(long, env = DATA_DIR_ENV)]
    pub data_dir: Option<PathBuf>,
    #[arg(long, default_value = "test", value_parser = ["train", "test"])]
    pub split: String,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 100)]
    pub seeds: u64,
    #[arg(long, default_value_t = 0)]
    pub first_seed: u64,
    #[arg(long, default_value_t = 10)]
    pub input: usize,
    #[arg(long, default_value_t = 20)]
    pub hidden: usize,
    #[arg(long, default_value_t = 5)]
    pub output: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub eta: f64,
    /// Steps per phase.
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    /// Required fraction of growth runs ending phase 1 with tr(FE) < 0.
    #[arg(long, default_value_t = 0.95)]
    pub threshold: f64,
    /// Required fraction of growth runs with tr(FWA) strictly decreasing.
    #[arg(long, default_value_t = 1.0)]
    pub fwa_threshold: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub identity_tolerance: f64,
    #[arg(long, default_value = "runs")]
    pub out: PathBuf,
    /// Alias for --first-seed
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct FetchArgs {
    /// mnist, cifar10 or cifar100.
    pub dataset: String,
    #[arg(long, env = DATA_DIR_ENV, default_value = "data")]
    pub data_dir: PathBuf,
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_OK
            }
        }
    }
}

pub fn run(cli: Cli) -> i32 {
    let exact = matches!(&cli.command, Command::Train(t) if t.exact_repro);
    let threads = if exact { Some(1) } else { cli.threads };
    if let Some(n) = threads {
        if n == 0 {
            return report(&Error::Usage("--threads must be positive".into()));
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let outcome = match cli.command {
        Command::Train(a) => cmd_train(&a).map(|_| EXIT_OK),
        Command::Eval(a) => cmd_eval(&a).map(|_| EXIT_OK),
        Command::VerifyLinear(a) => cmd_verify_linear(&a),
        Command::FetchData(a) => cmd_fetch_data(&a).map(|_| EXIT_OK),
    };
    outcome.unwrap_or_else(|e| report(&e))
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Usage(_) | Error::Json { .. } => EXIT_USAGE,
        Error::Divergence { .. } => EXIT_DIVERGED,
        _ => EXIT_RUNTIME,
    }
}

fn report(e: &Error) -> i32 {
    let kind = match e {
        Error::Shape { .. } => "shape",
        Error::Parameter(_) => "parameter",
        Error::Format { .. } => "format",
        Error::Config(_) => "config",
        Error::Usage(_) => "usage",
        Error::Divergence { .. } => "divergence",
        Error::UndefinedAngle => "undefined_angle",
        Error::Checksum { .. } => "checksum",
        Error::Version { .. } => "version",
        Error::Download { .. } => "download",
        Error::Io { .. } => "io",
        Error::Json { .. } => "json",
    };
    let mut obj = serde_json::json!({ "error": kind, "message": e.to_string() });
    if let Error::Divergence { quantity, site } = e {
        obj["quantity"] = serde_json::json!(quantity);
        obj["epoch"] = serde_json::json!(site.epoch);
        obj["step"] = serde_json::json!(site.step);
        obj["layer"] = serde_json::json!(site.layer);
    }
    eprintln!("{obj}");
    exit_code(e)
}

/// Fresh `<base>/<name>-<timestamp>-s<seed>` directory (suffixed when taken).
pub fn timestamped_dir(base: &Path, name: &str, seed: u64) -> Result<PathBuf> {
    let stamp = chrono::Local::now().format("%Y%m%dT%H%M%S");
    let stem = format!("{name}-{stamp}-s{seed}");
    std::fs::create_dir_all(base).map_err(|e| Error::io(format!("creating {}", base.display()), e))?;
    for i in 0.. {
        let dir = if i == 0 { base.join(&stem) } else { base.join(format!("{stem}-{i}")) };
        match std::fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(Error::io(format!("creating {}", dir.display()), e)),
        }
    }
    unreachable!()
}

/// Runs a manifest with overrides applied; returns the run directory.
pub fn cmd_train(args: &TrainArgs) -> Result<PathBuf> {
    let mut m = Manifest::load(&args.manifest)?;
    if let Some(seed) = args.seed {
        m.train.seed = seed;
    }
    if let Some(epochs) = args.epochs {
        m.train.epochs = epochs;
    }
    m.train.exact_repro |= args.exact_repro;
    m.validate()?;
    let (train, test, stats) = m.load_data()?;
    let base = args.out.clone().unwrap_or_else(|| m.output_dir.clone());
    let dir = timestamped_dir(&base, &m.name, m.train.seed)?;
    let manifest_copy = serde_json::to_string_pretty(&m).expect("manifest serializes");
    std::fs::write(dir.join("manifest.json"), manifest_copy).map_err(|e| Error::io("writing manifest copy", e))?;
    let summary = run_experiment(&m.experiment(stats.as_deref()), &train, &test, &dir)?;
    println!(
        "{}",
        serde_json::json!({
            "run_dir": dir,
            "epochs": summary.epochs_completed,
            "final_test_accuracy": summary.final_test_accuracy,
            "best_test_accuracy": summary.best_test_accuracy,
        })
    );
    Ok(dir)
}

fn eval_dataset(args: &EvalArgs, ck: &Checkpoint) -> Result<LabeledDataset> {
    let recorded: Option<Manifest> = ck
        .meta
        .pointer("/context/manifest")
        .and_then(|v| serde_json::from_value(v.clone()).ok());
    let source = match args.dataset.as_deref() {
        Some("mnist") => DatasetSource::Mnist { dir: None },
        Some("cifar10") => DatasetSource::Cifar10 { dir: None },
        Some("cifar100") => DatasetSource::Cifar100 { dir: None, coarse: false },
        Some("cifar100-coarse") => DatasetSource::Cifar100 { dir: None, coarse: true },
        Some(other) => return Err(Error::Usage(format!("unknown dataset '{other}'"))),
        None => recorded
            .as_ref()
            .map(|m| m.dataset.source.clone())
            .ok_or_else(|| Error::Usage("checkpoint records no dataset; pass --dataset".into()))?,
    };
    let source = match (source, &args.data_dir) {
        (DatasetSource::Mnist { .. }, Some(d)) => DatasetSource::Mnist { dir: Some(d.clone()) },
        (DatasetSource::Cifar10 { .. }, Some(d)) => DatasetSource::Cifar10 { dir: Some(d.clone()) },
        (DatasetSource::Cifar100 { coarse, .. }, Some(d)) => DatasetSource::Cifar100 { dir: Some(d.clone()), coarse },
        (s, _) => s,
    };
    let standardize = recorded.as_ref().is_some_and(|m| m.dataset.standardize);
    let m = Manifest {
        schema_version: MANIFEST_VERSION,
        name: "eval".into(),
        dataset: DatasetSection {
            source,
            standardize: false,
            train_limit: None,
            test_limit: recorded.as_ref().and_then(|m| m.dataset.test_limit),
        },
        model: ck.model.config().clone(),
        train: recorded.map(|m| m.train).unwrap_or_else(|| crate::trainer::TrainConfig::new(crate::rules::Rule::Bp, 1.0, 1, 0)),
        output_dir: PathBuf::from("."),
        diagnostics: Default::default(),
    };
    let (train, test, _) = m.load_data()?;
    let ds = if args.split == "train" { train } else { test };
    if standardize {
        let stats: Vec<(f64, f64)> = ck
            .meta
            .pointer("/context/input_stats")
            .and_then(|v| serde_json::from_value(v.clone()).ok())
            .ok_or_else(|| Error::Config("checkpoint lacks the input standardization statistics".into()))?;
        return ds.standardized(&stats);
    }
    Ok(ds)
}

/// Prints `{"accuracy", "loss", "samples"}` for the checkpoint on the split.
pub fn cmd_eval(args: &EvalArgs) -> Result<(f64, f64)> {
    let ck = Checkpoint::load(&args.checkpoint)?;
    let ds = eval_dataset(args, &ck)?;
    let ev = evaluate(&ck.model, &ds)?;
    println!("{}", serde_json::json!({ "accuracy": ev.accuracy, "loss": ev.loss, "samples": ds.len() }));
    Ok((ev.accuracy, ev.loss))
}

/// Writes `sweep.csv` and `summary.json` into a run directory; the exit code
/// reflects the verdict.
pub fn cmd_verify_linear(args: &VerifyArgs) -> Result<i32> {
    if args.seeds == 0 {
        return Err(Error::Usage("--seeds must be positive".into()));
    }
    let first = args.seed.unwrap_or(args.first_seed);
    let cfg = SweepConfig {
        seeds: (first..first + args.seeds).collect(),
        dims: LinDims { input: args.input, hidden: args.hidden, output: args.output },
        eta: args.eta,
        phase1_steps: args.steps,
        phase2_steps: args.steps,
    };
    let th = Thresholds {
        tr_fe_fraction: args.threshold,
        fwa_fraction: args.fwa_threshold,
        identity_tolerance: args.identity_tolerance,
    };
    let (rows, summary) = sweep(&cfg)?;
    let verdict = summary.verdict(&th, cfg.phase2_steps);
    let dir = timestamped_dir(&args.out, "verify-linear", first)?;
    let csv = dir.join("sweep.csv");
    write_sweep_csv(&csv, &rows)?;
    let json = serde_json::json!({
        "seeds": [first, first + args.seeds - 1],
        "dims": cfg.dims,
        "eta": cfg.eta,
        "steps_per_phase": args.steps,
        "thresholds": th,
        "summary": summary,
        "result": verdict,
    });
    std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&json).expect("json"))
        .map_err(|e| Error::io("writing verify-linear summary", e))?;
    println!("{}", serde_json::json!({ "report": csv, "summary": summary, "result": verdict }));
    Ok(match verdict {
        Verdict::Pass => EXIT_OK,
        Verdict::Fail(_) => EXIT_FAILED,
        Verdict::Inconclusive(_) => EXIT_INCONCLUSIVE,
    })
}

pub fn cmd_fetch_data(args: &FetchArgs) -> Result<FetchReport> {
    let id: DatasetId = args.dataset.parse()?;
    let r = fetch_dataset(id, &args.data_dir, &HttpDownloader)?;
    println!(
        "{}",
        serde_json::json!({ "dataset": args.dataset, "dir": args.data_dir, "downloaded": r.downloaded, "reused": r.reused })
    );
    Ok(r)
}
