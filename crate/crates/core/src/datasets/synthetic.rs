use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{derive_seed, Rng, Tensor};

use super::LabeledDataset;

/// Noisy class prototypes: every class owns a random image in `[0, 1]`;
/// samples add Gaussian pixel noise and are clipped back into `[0, 1]`.
/// Train and test splits share prototypes and differ in their noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub shape: [usize; 3],
    pub num_classes: usize,
    pub noise: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn generate(&self, name: &str, n: usize, split: u64) -> Result<LabeledDataset> {
        let size: usize = self.shape.iter().product();
        if size == 0 || self.num_classes == 0 {
            return Err(Error::Parameter("synthetic data needs positive dimensions".into()));
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return Err(Error::Parameter(format!("noise {} must be finite and ≥ 0", self.noise)));
        }
        let mut proto_rng = Rng::new(derive_seed(self.seed, "synthetic-prototypes", 0));
        let prototypes: Vec<f64> = (0..self.num_classes * size).map(|_| proto_rng.uniform()).collect();
        let mut rng = Rng::new(derive_seed(self.seed, "synthetic-samples", split + 1));
        let mut labels = Vec::with_capacity(n);
        let mut data = Vec::with_capacity(n * size);
        for _ in 0..n {
            let c = (rng.next_u64() % self.num_classes as u64) as usize;
            labels.push(c);
            let p = &prototypes[c * size..(c + 1) * size];
            data.extend(p.iter().map(|&v| (v + self.noise * rng.standard_normal()).clamp(0.0, 1.0)));
        }
        let [ch, h, w] = self.shape;
        LabeledDataset::new(name, Tensor::new(vec![n, ch, h, w], data)?, labels, self.num_classes)
    }
}
