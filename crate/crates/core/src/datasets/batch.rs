use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::numerics::{Concern, Rng, Tensor};

use super::LabeledDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchPlan {
    pub batch_size: usize,
    /// Master seed; each epoch's permutation comes from the shuffle stream at that epoch.
    pub seed: u64,
    pub drop_last: bool,
}

/// One mini-batch: inputs flattened to `[B × input_size]`.
#[derive(Debug, Clone)]
pub struct Batch {
    pub indices: Vec<usize>,
    pub inputs: Tensor,
    pub targets: Tensor,
}

pub struct BatchIter<'a> {
    dataset: &'a LabeledDataset,
    order: Vec<usize>,
    batch_size: usize,
    drop_last: bool,
    pos: usize,
}

impl BatchIter<'_> {
    /// The epoch's sample permutation.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn num_batches(&self) -> usize {
        let n = self.order.len();
        if self.drop_last {
            n / self.batch_size
        } else {
            n.div_ceil(self.batch_size)
        }
    }
}

impl Iterator for BatchIter<'_> {
    type Item = Batch;

    fn next(&mut self) -> Option<Batch> {
        let n = self.order.len();
        if self.pos >= n {
            return None;
        }
        let end = (self.pos + self.batch_size).min(n);
        if self.drop_last && end - self.pos < self.batch_size {
            return None;
        }
        let indices = self.order[self.pos..end].to_vec();
        self.pos = end;
        let (inputs, targets) = self.dataset.gather(&indices);
        Some(Batch {
            indices,
            inputs,
            targets,
        })
    }
}

/// One shuffled pass over `dataset`, reproducible from `(plan.seed, epoch)`.
pub fn batch_iter<'a>(dataset: &'a LabeledDataset, plan: &BatchPlan, epoch: usize) -> Result<BatchIter<'a>> {
    if plan.batch_size == 0 {
        return Err(Error::Parameter("batch size must be positive".into()));
    }
    if plan.batch_size > dataset.len() {
        return Err(Error::Parameter(format!(
            "batch size {} exceeds dataset size {}",
            plan.batch_size,
            dataset.len()
        )));
    }
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut rng = Rng::for_concern_indexed(plan.seed, Concern::Shuffle, epoch as u64);
    order.shuffle(rng.inner_mut());
    Ok(BatchIter {
        dataset,
        order,
        batch_size: plan.batch_size,
        drop_last: plan.drop_last,
        pos: 0,
    })
}
