use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::datasets::{batch_iter, BatchPlan, LabeledDataset};
use crate::diagnostics::{model_alignment_angle, weight_histogram, weight_norm, write_histogram_rows};
use crate::error::{Error, Result};
use crate::network::{export_embeddings, LayerSpec, Model, ModelConfig};
use crate::numerics::{Concern, Rng};

use super::checkpoint::Checkpoint;
use super::step::{evaluate, train_step, TrainConfig};
use super::OptimizerState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingConfig {
    /// Activation index; 0 is the input.
    pub layer: usize,
    /// Number of leading test samples exported (all when absent).
    #[serde(default)]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsConfig {
    pub angle: bool,
    pub histograms: bool,
    pub histogram_bins: usize,
    pub embeddings: Option<EmbeddingConfig>,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            angle: true,
            histograms: true,
            histogram_bins: 50,
            embeddings: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub name: String,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub diagnostics: DiagnosticsConfig,
    /// Echoed verbatim into the summary and checkpoint metadata.
    pub context: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRecord {
    pub epoch: usize,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub train_loss: f64,
    pub alignment_angle_deg: Option<f64>,
    pub weight_norms: Vec<f64>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub name: String,
    pub status: String,
    pub error: Option<String>,
    pub seed: u64,
    pub epochs_completed: usize,
    pub final_test_accuracy: f64,
    pub final_train_accuracy: f64,
    pub best_test_accuracy: f64,
    pub best_epoch: usize,
    pub initial_angle_deg: Option<f64>,
    pub final_angle_deg: Option<f64>,
    pub output_weight_std: f64,
    pub train_samples: usize,
    pub test_samples: usize,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub diagnostics: DiagnosticsConfig,
    pub context: serde_json::Value,
    pub records: Vec<MetricsRecord>,
}

/// Files written by [`run_experiment`] inside its output directory.
pub mod files {
    pub const METRICS: &str = "metrics.csv";
    pub const SUMMARY: &str = "summary.json";
    pub const CHECKPOINT: &str = "checkpoint.bin";
    pub const ANGLE: &str = "angle.csv";
    pub const HISTOGRAMS: &str = "histograms.csv";
    pub const WEIGHT_STATS: &str = "weight_stats.csv";
    pub const TIMING: &str = "timing.csv";
    pub const EMBEDDINGS: &str = "embeddings.csv";
}

struct Sinks {
    dir: PathBuf,
    metrics: BufWriter<File>,
    angle: Option<BufWriter<File>>,
    histograms: Option<BufWriter<File>>,
    stats: Option<BufWriter<File>>,
    timing: Option<BufWriter<File>>,
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(format!("creating {}", path.display()), e))
}

impl Sinks {
    fn open(dir: &Path, exp: &Experiment, trainable: &[usize], with_angle: bool) -> Result<Sinks> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
        let metrics = create(dir, files::METRICS)?;
        let norms: Vec<String> = trainable.iter().map(|l| format!("norm_w{l}")).collect();
        let header = format!(
            "epoch,train_accuracy,test_accuracy,train_loss,alignment_angle_deg,{},wall_time_s",
            norms.join(",")
        );
        let mut s = Sinks {
            dir: dir.to_path_buf(),
            metrics,
            angle: None,
            histograms: None,
            stats: None,
            timing: None,
        };
        s.line(|s| writeln!(s.metrics, "{header}"))?;
        if with_angle {
            let mut a = create(dir, files::ANGLE)?;
            writeln!(a, "epoch,angle_deg").map_err(|e| Error::io("angle", e))?;
            s.angle = Some(a);
        }
        if exp.diagnostics.histograms {
            s.histograms = Some(create(dir, files::HISTOGRAMS)?);
            let mut st = create(dir, files::WEIGHT_STATS)?;
            writeln!(st, "epoch,layer,mean,std,min,max").map_err(|e| Error::io("weight stats", e))?;
            s.stats = Some(st);
        }
        if exp.train.exact_repro {
            let mut t = create(dir, files::TIMING)?;
            writeln!(t, "epoch,wall_time_s").map_err(|e| Error::io("timing", e))?;
            s.timing = Some(t);
        }
        Ok(s)
    }

    fn line(&mut self, f: impl FnOnce(&mut Self) -> std::io::Result<()>) -> Result<()> {
        let dir = self.dir.display().to_string();
        f(self).map_err(|e| Error::io(format!("writing outputs in {dir}"), e))
    }

    fn flush(&mut self) -> Result<()> {
        let dir = self.dir.display().to_string();
        let mut all: Vec<&mut BufWriter<File>> = vec![&mut self.metrics];
        all.extend(self.angle.as_mut());
        all.extend(self.histograms.as_mut());
        all.extend(self.stats.as_mut());
        all.extend(self.timing.as_mut());
        for w in all {
            w.flush().map_err(|e| Error::io(format!("flushing outputs in {dir}"), e))?;
        }
        Ok(())
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Trains `exp` on `train`, evaluating on both sets after every epoch
/// (epoch 0 is the untrained model). Writes metrics, diagnostics, the final
/// checkpoint and a summary into `out_dir`. A failed run still writes its
/// summary, with the error, before returning it.
pub fn run_experiment(exp: &Experiment, train: &LabeledDataset, test: &LabeledDataset, out_dir: &Path) -> Result<ExperimentSummary> {
    exp.train.validate()?;
    exp.model.shapes()?;
    let seed = exp.train.seed;
    let mut model = Model::build(&exp.model, &exp.train.init_spec(), seed)?;
    let trainable = model.trainable_layers();
    let with_angle = exp.diagnostics.angle && !exp.model.layers.iter().any(|l| matches!(l, LayerSpec::Conv { .. }));
    let mut sinks = Sinks::open(out_dir, exp, &trainable, with_angle)?;
    let mut summary = ExperimentSummary {
        name: exp.name.clone(),
        status: "running".into(),
        error: None,
        seed,
        epochs_completed: 0,
        final_test_accuracy: f64::NAN,
        final_train_accuracy: f64::NAN,
        best_test_accuracy: f64::NAN,
        best_epoch: 0,
        initial_angle_deg: None,
        final_angle_deg: None,
        output_weight_std: f64::NAN,
        train_samples: train.len(),
        test_samples: test.len(),
        model: exp.model.clone(),
        train: exp.train.clone(),
        diagnostics: exp.diagnostics.clone(),
        context: exp.context.clone(),
        records: Vec::new(),
    };
    let mut opt = OptimizerState::new(&model);
    let outcome = train_loop(exp, &mut model, &mut opt, train, test, &mut sinks, &mut summary, with_angle);

    match &outcome {
        Ok(()) => summary.status = "completed".into(),
        Err(e) => {
            summary.status = if e.is_divergence() { "diverged" } else { "failed" }.into();
            summary.error = Some(e.to_string());
        }
    }
    sinks.flush()?;
    if outcome.is_ok() {
        if let Some(w) = model.weight(*trainable.last().expect("trainable output")) {
            summary.output_weight_std = weight_histogram(w, 1, None)?.std;
        }
        let meta = serde_json::json!({
            "name": exp.name,
            "epoch": summary.epochs_completed,
            "seed": seed,
            "context": exp.context,
        });
        Checkpoint::new(model.clone(), Some(opt), meta).save(out_dir.join(files::CHECKPOINT))?;
        if let Some(emb) = exp.diagnostics.embeddings {
            let subset = emb.samples.map_or_else(|| test.clone(), |n| test.take(n.min(test.len())));
            export_embeddings(&model, &subset, emb.layer, &out_dir.join(files::EMBEDDINGS))?;
        }
    }
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    let path = out_dir.join(files::SUMMARY);
    std::fs::write(&path, json).map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    outcome.map(|()| summary)
}

#[allow(clippy::too_many_arguments)]
fn train_loop(
    exp: &Experiment,
    model: &mut Model,
    opt: &mut OptimizerState,
    train: &LabeledDataset,
    test: &LabeledDataset,
    sinks: &mut Sinks,
    summary: &mut ExperimentSummary,
    with_angle: bool,
) -> Result<()> {
    let cfg = &exp.train;
    let plan = BatchPlan { batch_size: cfg.batch_size, seed: cfg.seed, drop_last: false };
    let start = Instant::now();
    record_epoch(exp, model, train, test, sinks, summary, with_angle, 0, start)?;
    for epoch in 1..=cfg.epochs {
        let lr = cfg.lr_at_epoch(epoch - 1);
        let mut dropout_rng = Rng::for_concern_indexed(cfg.seed, Concern::Dropout, (epoch - 1) as u64);
        for (step, batch) in batch_iter(train, &plan, epoch - 1)?.enumerate() {
            train_step(model, &batch.inputs, &batch.targets, cfg, lr, opt, &mut dropout_rng)
                .map_err(|e| e.at_step(epoch, step))?;
        }
        record_epoch(exp, model, train, test, sinks, summary, with_angle, epoch, start)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn record_epoch(
    exp: &Experiment,
    model: &Model,
    train: &LabeledDataset,
    test: &LabeledDataset,
    sinks: &mut Sinks,
    summary: &mut ExperimentSummary,
    with_angle: bool,
    epoch: usize,
    start: Instant,
) -> Result<()> {
    let tr = evaluate(model, train).map_err(|e| e.at_step(epoch, 0))?;
    let te = evaluate(model, test).map_err(|e| e.at_step(epoch, 0))?;
    let angle = if with_angle { Some(model_alignment_angle(model)?) } else { None };
    let trainable = model.trainable_layers();
    let norms: Vec<f64> = trainable.iter().map(|&l| weight_norm(model.weight(l).expect("trainable"))).collect();
    let wall = start.elapsed().as_secs_f64();
    let rec = MetricsRecord {
        epoch,
        train_accuracy: tr.accuracy,
        test_accuracy: te.accuracy,
        train_loss: tr.loss,
        alignment_angle_deg: angle,
        weight_norms: norms,
        wall_time_s: if exp.train.exact_repro { f64::NAN } else { wall },
    };

    let exact = exp.train.exact_repro;
    let bins = exp.diagnostics.histogram_bins;
    let hist_epoch = epoch == 0 || epoch == exp.train.epochs;
    sinks.line(|s| {
        let norms: Vec<String> = rec.weight_norms.iter().map(f64::to_string).collect();
        let wall_col = if exact { String::new() } else { wall.to_string() };
        writeln!(
            s.metrics,
            "{},{},{},{},{},{},{}",
            epoch,
            rec.train_accuracy,
            rec.test_accuracy,
            rec.train_loss,
            fmt_opt(angle),
            norms.join(","),
            wall_col
        )?;
        if let (Some(a), Some(w)) = (angle, s.angle.as_mut()) {
            writeln!(w, "{epoch},{a}")?;
        }
        if let Some(t) = s.timing.as_mut() {
            writeln!(t, "{epoch},{wall}")?;
        }
        Ok(())
    })?;
    for &l in &trainable {
        let w = model.weight(l).expect("trainable");
        if sinks.stats.is_none() {
            break;
        }
        let h = weight_histogram(w, bins.max(1), None)?;
        sinks.line(|s| {
            if let Some(st) = s.stats.as_mut() {
                writeln!(st, "{epoch},{l},{},{},{},{}", h.mean, h.std, h.min, h.max)?;
            }
            if hist_epoch {
                if let Some(hw) = s.histograms.as_mut() {
                    write_histogram_rows(hw, epoch, l, &h, epoch == 0 && l == trainable[0])?;
                }
            }
            Ok(())
        })?;
    }
    sinks.flush()?;

    summary.epochs_completed = epoch;
    summary.final_test_accuracy = te.accuracy;
    summary.final_train_accuracy = tr.accuracy;
    if epoch == 0 || te.accuracy > summary.best_test_accuracy {
        summary.best_test_accuracy = te.accuracy;
        summary.best_epoch = epoch;
    }
    if epoch == 0 {
        summary.initial_angle_deg = angle;
    }
    summary.final_angle_deg = angle;
    summary.records.push(rec);
    Ok(())
}
