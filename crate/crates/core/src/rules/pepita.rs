//! Forward-only updates from the difference between a standard and a
//! modulated pass.
//!
//! Hidden layer `ℓ`: `ΔW_ℓ = (h_ℓ − h_ℓ^err)·(h_{ℓ−1}^err)ᵀ`, where the
//! first layer's presynaptic term is the modulated input `x + F·e`.
//! Output layer: `ΔW_L = e·(h_{L−1}^err)ᵀ`. The variant takes every
//! presynaptic term from the standard pass instead. Convolutional layers
//! average the per-pixel products over the output map.

use crate::error::{Error, Result};
use crate::network::{ActivationTrace, LayerSpec, Model};
use crate::numerics::Tensor;

use super::grad::{conv_geometry, weight_grad};
use super::{check_trace, Rule, UpdateSet};

/// Source of the presynaptic activity in the update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Presynaptic {
    /// Activity of the modulated pass (the default rule).
    Modulated,
    /// Activity of the standard pass (the variant).
    Standard,
}

fn check_pair(model: &Model, std: &ActivationTrace, modulated: &ActivationTrace, e: &Tensor) -> Result<()> {
    check_trace(model, std)?;
    check_trace(model, modulated)?;
    if std.batch_size() != modulated.batch_size() {
        return Err(Error::shape("paired traces", std.input.shape(), modulated.input.shape()));
    }
    if e.shape() != std.output().shape() {
        return Err(Error::shape("error vector", e.shape(), std.output().shape()));
    }
    Ok(())
}

/// Update for every trainable layer (dense and convolutional).
pub fn pepita_update(
    model: &Model,
    std: &ActivationTrace,
    modulated: &ActivationTrace,
    e: &Tensor,
    presynaptic: Presynaptic,
) -> Result<UpdateSet> {
    check_pair(model, std, modulated, e)?;
    let trainable = model.trainable_layers();
    let last = *trainable.last().expect("validated models end in a dense layer");
    let batch = std.batch_size() as f64;
    let mut deltas = vec![None; model.num_layers()];
    for &l in &trainable {
        let pre = match presynaptic {
            Presynaptic::Modulated => modulated.activation(l),
            Presynaptic::Standard => std.activation(l),
        };
        let delta = if l == last {
            weight_grad(model, l, e, pre, 1.0 / batch)?
        } else {
            let diff = std.layers[l].post.sub(&modulated.layers[l].post)?;
            let scale = match model.layers()[l] {
                LayerSpec::Conv { .. } => 1.0 / (batch * conv_geometry(model, l)?.0.positions() as f64),
                _ => 1.0 / batch,
            };
            weight_grad(model, l, &diff, pre, scale)?
        };
        deltas[l] = Some(delta);
    }
    let rule = match presynaptic {
        Presynaptic::Modulated => Rule::Pepita,
        Presynaptic::Standard => Rule::PepitaVariant,
    };
    Ok(UpdateSet { rule, deltas })
}

pub fn pepita_update_fc(model: &Model, std: &ActivationTrace, modulated: &ActivationTrace, e: &Tensor) -> Result<UpdateSet> {
    pepita_update(model, std, modulated, e, Presynaptic::Modulated)
}

pub fn pepita_update_fc_variant(
    model: &Model,
    std: &ActivationTrace,
    modulated: &ActivationTrace,
    e: &Tensor,
) -> Result<UpdateSet> {
    pepita_update(model, std, modulated, e, Presynaptic::Standard)
}

/// Filter update of convolutional layer `layer`: conv-output differences
/// (before pooling) times the modulated-pass input patches, summed over
/// output pixels, divided by the pixel count, averaged over the batch.
pub fn pepita_update_conv(
    model: &Model,
    std: &ActivationTrace,
    modulated: &ActivationTrace,
    layer: usize,
    presynaptic: Presynaptic,
) -> Result<Tensor> {
    if !matches!(model.layers().get(layer), Some(LayerSpec::Conv { .. })) {
        return Err(Error::Usage(format!("layer {layer} is not convolutional")));
    }
    check_trace(model, std)?;
    check_trace(model, modulated)?;
    let (g, _) = conv_geometry(model, layer)?;
    let diff = std.layers[layer].post.sub(&modulated.layers[layer].post)?;
    let pre = match presynaptic {
        Presynaptic::Modulated => modulated.activation(layer),
        Presynaptic::Standard => std.activation(layer),
    };
    let scale = 1.0 / (std.batch_size() * g.positions()) as f64;
    weight_grad(model, layer, &diff, pre, scale)
}
