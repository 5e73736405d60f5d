use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::datasets::{load_cifar10, load_cifar100, load_mnist, LabelGranularity, LabeledDataset, SyntheticSpec};
use crate::error::{Error, Result};
use crate::network::ModelConfig;
use crate::trainer::{DiagnosticsConfig, Experiment, TrainConfig};

pub const MANIFEST_VERSION: u32 = 1;
pub const DATA_DIR_ENV: &str = "PEPITA_DATA_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    Mnist {
        #[serde(default)]
        dir: Option<PathBuf>,
    },
    Cifar10 {
        #[serde(default)]
        dir: Option<PathBuf>,
    },
    Cifar100 {
        #[serde(default)]
        dir: Option<PathBuf>,
        #[serde(default)]
        coarse: bool,
    },
    Synthetic {
        shape: [usize; 3],
        num_classes: usize,
        noise: f64,
        seed: u64,
        train_samples: usize,
        test_samples: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub source: DatasetSource,
    /// Per-channel standardization with training-set statistics.
    #[serde(default)]
    pub standardize: bool,
    #[serde(default)]
    pub train_limit: Option<usize>,
    #[serde(default)]
    pub test_limit: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema_version: u32,
    pub name: String,
    pub dataset: DatasetSection,
    pub model: ModelConfig,
    pub train: TrainConfig,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
}

fn default_output() -> PathBuf {
    PathBuf::from("runs")
}

/// File locations of a dataset inside a data directory, as laid out by `fetch-data`.
pub fn dataset_files(source: &DatasetSource, dir: &Path) -> (Vec<PathBuf>, Vec<PathBuf>) {
    match source {
        DatasetSource::Mnist { .. } => {
            let d = dir.join("mnist");
            (
                vec![d.join("train-images-idx3-ubyte"), d.join("train-labels-idx1-ubyte")],
                vec![d.join("t10k-images-idx3-ubyte"), d.join("t10k-labels-idx1-ubyte")],
            )
        }
        DatasetSource::Cifar10 { .. } => {
            let d = dir.join("cifar-10-batches-bin");
            ((1..=5).map(|i| d.join(format!("data_batch_{i}.bin"))).collect(), vec![d.join("test_batch.bin")])
        }
        DatasetSource::Cifar100 { .. } => {
            let d = dir.join("cifar-100-binary");
            (vec![d.join("train.bin")], vec![d.join("test.bin")])
        }
        DatasetSource::Synthetic { .. } => (Vec::new(), Vec::new()),
    }
}

/// Existing path for `p`, accepting a gzip-compressed sibling `p.gz`.
fn existing(p: &Path) -> Option<PathBuf> {
    if p.is_file() {
        return Some(p.to_path_buf());
    }
    let gz = PathBuf::from(format!("{}.gz", p.display()));
    gz.is_file().then_some(gz)
}

/// Train split, test split and the per-channel `(mean, std)` used to
/// standardize them, if any.
pub type LoadedData = (LabeledDataset, LabeledDataset, Option<Vec<(f64, f64)>>);

impl Manifest {
    pub fn from_json(text: &str, origin: &str) -> Result<Manifest> {
        let m: Manifest = serde_json::from_str(text).map_err(|e| Error::Json { context: origin.to_string(), source: e })?;
        m.validate_schema()?;
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Manifest> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let mut m = Manifest::from_json(&text, &path.display().to_string())?;
        if let Some(base) = path.parent() {
            m.rebase(base);
        }
        Ok(m)
    }

    /// Resolves relative dataset directories against `base`.
    fn rebase(&mut self, base: &Path) {
        if let DatasetSource::Mnist { dir: Some(d) } | DatasetSource::Cifar10 { dir: Some(d) } | DatasetSource::Cifar100 { dir: Some(d), .. } =
            &mut self.dataset.source
        {
            if d.is_relative() {
                *d = base.join(&*d);
            }
        }
    }

    fn validate_schema(&self) -> Result<()> {
        if self.schema_version != MANIFEST_VERSION {
            return Err(Error::Config(format!(
                "manifest schema version {} is not supported (expected {MANIFEST_VERSION})",
                self.schema_version
            )));
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::Config(format!("invalid experiment name '{}'", self.name)));
        }
        self.train.validate()?;
        self.model.shapes()?;
        Ok(())
    }

    /// Data directory: the manifest's own, else the environment default, else `data`.
    pub fn data_dir(&self) -> PathBuf {
        let own = match &self.dataset.source {
            DatasetSource::Mnist { dir } | DatasetSource::Cifar10 { dir } | DatasetSource::Cifar100 { dir, .. } => dir.clone(),
            DatasetSource::Synthetic { .. } => None,
        };
        own.or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("data"))
    }

    /// Full validation: schema, dataset files present, model shape matches data.
    pub fn validate(&self) -> Result<()> {
        self.validate_schema()?;
        let (train, test) = dataset_files(&self.dataset.source, &self.data_dir());
        for p in train.iter().chain(&test) {
            if existing(p).is_none() {
                return Err(Error::Config(format!(
                    "missing dataset file {} (run `pepita fetch-data` or set {DATA_DIR_ENV})",
                    p.display()
                )));
            }
        }
        let (shape, classes) = match &self.dataset.source {
            DatasetSource::Mnist { .. } => ([1, 28, 28], 10),
            DatasetSource::Cifar10 { .. } => ([3, 32, 32], 10),
            DatasetSource::Cifar100 { coarse, .. } => ([3, 32, 32], if *coarse { 20 } else { 100 }),
            DatasetSource::Synthetic { shape, num_classes, .. } => (*shape, *num_classes),
        };
        if self.model.input_shape != shape || self.model.num_classes != classes {
            return Err(Error::Config(format!(
                "model expects input {:?} with {} classes but the dataset provides {:?} with {}",
                self.model.input_shape, self.model.num_classes, shape, classes
            )));
        }
        Ok(())
    }

    /// Loads `(train, test)` with the configured limits and normalization.
    /// Returns the standardization statistics when applied.
    pub fn load_data(&self) -> Result<LoadedData> {
        let (train_files, test_files) = dataset_files(&self.dataset.source, &self.data_dir());
        let resolve = |ps: &[PathBuf]| -> Result<Vec<PathBuf>> {
            ps.iter()
                .map(|p| existing(p).ok_or_else(|| Error::Config(format!("missing dataset file {}", p.display()))))
                .collect()
        };
        let (train, test) = match &self.dataset.source {
            DatasetSource::Mnist { .. } => {
                let (a, b) = (resolve(&train_files)?, resolve(&test_files)?);
                (load_mnist(&a[0], &a[1])?, load_mnist(&b[0], &b[1])?)
            }
            DatasetSource::Cifar10 { .. } => (load_cifar10(&resolve(&train_files)?)?, load_cifar10(&resolve(&test_files)?)?),
            DatasetSource::Cifar100 { coarse, .. } => {
                let g = if *coarse { LabelGranularity::Coarse } else { LabelGranularity::Fine };
                (load_cifar100(&resolve(&train_files)?[0], g)?, load_cifar100(&resolve(&test_files)?[0], g)?)
            }
            DatasetSource::Synthetic { shape, num_classes, noise, seed, train_samples, test_samples } => {
                let spec = SyntheticSpec { shape: *shape, num_classes: *num_classes, noise: *noise, seed: *seed };
                (spec.generate("synthetic-train", *train_samples, 0)?, spec.generate("synthetic-test", *test_samples, 1)?)
            }
        };
        let limit = |d: LabeledDataset, n: Option<usize>| match n {
            Some(n) if n < d.len() => d.take(n),
            _ => d,
        };
        let (train, test) = (limit(train, self.dataset.train_limit), limit(test, self.dataset.test_limit));
        if self.dataset.standardize {
            let stats = train.channel_stats();
            Ok((train.standardized(&stats)?, test.standardized(&stats)?, Some(stats)))
        } else {
            Ok((train, test, None))
        }
    }

    pub fn experiment(&self, stats: Option<&[(f64, f64)]>) -> Experiment {
        Experiment {
            name: self.name.clone(),
            model: self.model.clone(),
            train: self.train.clone(),
            diagnostics: self.diagnostics.clone(),
            context: serde_json::json!({
                "manifest": self,
                "input_stats": stats,
            }),
        }
    }
}
