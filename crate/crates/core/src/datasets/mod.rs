//! Image classification datasets read from their canonical binary files.
//!
//! Pixels are scaled into `[0, 1]` by dividing by 255. Images are stored as
//! `N×C×H×W`; models consume each sample flattened in that same row-major
//! order (channel, then row, then column).

mod batch;
mod cifar;
mod mnist;
mod synthetic;

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::Tensor;

pub use batch::{batch_iter, Batch, BatchIter, BatchPlan};
pub use cifar::{load_cifar10, load_cifar100, write_cifar_records, LabelGranularity};
pub use mnist::{load_mnist, write_idx_images, write_idx_labels};
pub use synthetic::SyntheticSpec;

#[derive(Debug, Clone)]
pub struct LabeledDataset {
    name: String,
    inputs: Tensor,
    targets: Tensor,
    labels: Vec<usize>,
    num_classes: usize,
}

impl LabeledDataset {
    /// `inputs` must be `N×C×H×W`; one-hot targets are derived from `labels`.
    pub fn new(name: impl Into<String>, inputs: Tensor, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if inputs.rank() != 4 || inputs.shape()[0] != labels.len() {
            return Err(Error::shape("dataset inputs vs labels", inputs.shape(), &[labels.len()]));
        }
        if let Some(bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::Parameter(format!(
                "label {bad} out of range for {num_classes} classes"
            )));
        }
        let targets = one_hot(&labels, num_classes);
        Ok(LabeledDataset {
            name: name.into(),
            inputs,
            targets,
            labels,
            num_classes,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn inputs(&self) -> &Tensor {
        &self.inputs
    }

    pub fn targets(&self) -> &Tensor {
        &self.targets
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// `[C, H, W]` of one sample.
    pub fn sample_shape(&self) -> [usize; 3] {
        let s = self.inputs.shape();
        [s[1], s[2], s[3]]
    }

    pub fn input_size(&self) -> usize {
        self.sample_shape().iter().product()
    }

    /// Gathers samples into `[B × input_size]` inputs and `[B × classes]` targets.
    pub fn gather(&self, indices: &[usize]) -> (Tensor, Tensor) {
        let d = self.input_size();
        let c = self.num_classes;
        let mut x = Vec::with_capacity(indices.len() * d);
        let mut t = Vec::with_capacity(indices.len() * c);
        for &i in indices {
            x.extend_from_slice(&self.inputs.data()[i * d..(i + 1) * d]);
            t.extend_from_slice(&self.targets.data()[i * c..(i + 1) * c]);
        }
        (
            Tensor::new(vec![indices.len(), d], x).expect("gather inputs"),
            Tensor::new(vec![indices.len(), c], t).expect("gather targets"),
        )
    }

    /// First `n` samples (or all, if fewer).
    pub fn take(&self, n: usize) -> LabeledDataset {
        let n = n.min(self.len());
        let idx: Vec<usize> = (0..n).collect();
        let (x, _) = self.gather(&idx);
        let [c, h, w] = self.sample_shape();
        let inputs = x.reshape(vec![n, c, h, w]).expect("take reshape");
        LabeledDataset::new(self.name.clone(), inputs, self.labels[..n].to_vec(), self.num_classes)
            .expect("subset of a valid dataset")
    }

    /// Per-channel mean and standard deviation over all samples.
    pub fn channel_stats(&self) -> Vec<(f64, f64)> {
        let [c, h, w] = self.sample_shape();
        let plane = h * w;
        let mut sums = vec![(0.0f64, 0.0f64); c];
        for sample in self.inputs.data().chunks(c * plane) {
            for (ch, acc) in sums.iter_mut().enumerate() {
                for &v in &sample[ch * plane..(ch + 1) * plane] {
                    acc.0 += v;
                    acc.1 += v * v;
                }
            }
        }
        let n = (self.len() * plane) as f64;
        sums.into_iter()
            .map(|(s, sq)| {
                let mean = s / n;
                let var = (sq / n - mean * mean).max(0.0);
                (mean, var.sqrt())
            })
            .collect()
    }

    /// Per-channel standardization with externally supplied statistics.
    /// The result no longer lies in `[0, 1]`.
    pub fn standardized(&self, stats: &[(f64, f64)]) -> Result<LabeledDataset> {
        let [c, h, w] = self.sample_shape();
        if stats.len() != c {
            return Err(Error::shape("channel stats", &[c], &[stats.len()]));
        }
        let plane = h * w;
        let mut data = self.inputs.data().to_vec();
        for sample in data.chunks_mut(c * plane) {
            for (ch, &(mean, std)) in stats.iter().enumerate() {
                let std = if std > 0.0 { std } else { 1.0 };
                for v in &mut sample[ch * plane..(ch + 1) * plane] {
                    *v = (*v - mean) / std;
                }
            }
        }
        Ok(LabeledDataset {
            name: self.name.clone(),
            inputs: Tensor::new(self.inputs.shape().to_vec(), data)?,
            targets: self.targets.clone(),
            labels: self.labels.clone(),
            num_classes: self.num_classes,
        })
    }
}

pub fn one_hot(labels: &[usize], num_classes: usize) -> Tensor {
    let mut t = Tensor::zeros(vec![labels.len(), num_classes]);
    for (i, &l) in labels.iter().enumerate() {
        t.set2(i, l, 1.0);
    }
    t
}

/// Reads a whole file, transparently gunzipping when it starts with the gzip magic.
pub(crate) fn read_maybe_gz(path: &Path) -> Result<Vec<u8>> {
    let raw = std::fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        flate2::read::GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| Error::io(format!("decompressing {}", path.display()), e))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}
