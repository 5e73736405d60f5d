use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::Model;
use crate::numerics::Tensor;
use crate::rules::UpdateSet;

/// Momentum velocities, one per trainable layer.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    velocities: Vec<Option<Tensor>>,
}

impl OptimizerState {
    pub fn new(model: &Model) -> Self {
        OptimizerState {
            velocities: model
                .weights()
                .iter()
                .map(|w| w.as_ref().map(|w| Tensor::zeros(w.shape().to_vec())))
                .collect(),
        }
    }

    pub fn from_velocities(model: &Model, velocities: Vec<Option<Tensor>>) -> Result<Self> {
        if velocities.len() != model.num_layers() {
            return Err(Error::shape("velocities", &[velocities.len()], &[model.num_layers()]));
        }
        for (v, w) in velocities.iter().zip(model.weights()) {
            match (v, w) {
                (Some(v), Some(w)) if v.shape() == w.shape() => {}
                (None, None) => {}
                (v, w) => {
                    return Err(Error::shape(
                        "velocity vs weight",
                        v.as_ref().map(Tensor::shape).unwrap_or(&[]),
                        w.as_ref().map(Tensor::shape).unwrap_or(&[]),
                    ))
                }
            }
        }
        Ok(OptimizerState { velocities })
    }

    pub fn velocities(&self) -> &[Option<Tensor>] {
        &self.velocities
    }
}

/// `v ← μ·v + ΔW; W ← W − η·v` on one tensor.
pub fn momentum_update(w: &mut Tensor, v: &mut Tensor, dw: &Tensor, lr: f64, momentum: f64) -> Result<()> {
    if w.shape() != dw.shape() || v.shape() != dw.shape() {
        return Err(Error::shape("momentum update", w.shape(), dw.shape()));
    }
    for ((vi, wi), di) in v.data_mut().iter_mut().zip(w.data_mut().iter_mut()).zip(dw.data()) {
        *vi = momentum * *vi + di;
        *wi -= lr * *vi;
    }
    Ok(())
}

/// Applies `updates` to every trainable layer. Non-finite updates are rejected
/// before anything is modified.
pub fn sgd_momentum_step(
    model: &mut Model,
    updates: &UpdateSet,
    state: &mut OptimizerState,
    lr: f64,
    momentum: f64,
) -> Result<()> {
    updates.validate(model)?;
    if state.velocities.len() != model.num_layers() {
        return Err(Error::shape("optimizer state", &[state.velocities.len()], &[model.num_layers()]));
    }
    for (l, (w, v)) in model.weights_mut().iter_mut().zip(state.velocities.iter_mut()).enumerate() {
        if let (Some(w), Some(v), Some(dw)) = (w.as_mut(), v.as_mut(), updates.delta(l)) {
            momentum_update(w, v, dw, lr, momentum)?;
            w.ensure_finite("weight", Some(l + 1))?;
        }
    }
    Ok(())
}

/// One multiplicative step of the learning-rate schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Decay {
    pub epoch: usize,
    pub factor: f64,
}

/// Base rate times every factor whose epoch is ≤ `epoch` (0-based).
pub fn lr_at_epoch(base: f64, decay: &[Decay], epoch: usize) -> f64 {
    decay.iter().filter(|d| d.epoch <= epoch).fold(base, |lr, d| lr * d.factor)
}
