use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{conv_from_cols, im2col, maxpool_slice, ConvGeometry, PoolGeometry, Rng, Tensor};

use super::{LayerSpec, Model};

/// Inverted-dropout masks for one training step: entries are `0` or `1/(1−p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutMasks {
    masks: Vec<Option<Tensor>>,
}

impl DropoutMasks {
    pub fn none(model: &Model) -> Self {
        DropoutMasks {
            masks: vec![None; model.num_layers()],
        }
    }

    pub fn sample(model: &Model, batch: usize, rng: &mut Rng) -> Self {
        let masks = model
            .layers()
            .iter()
            .enumerate()
            .map(|(l, layer)| {
                let p = layer.dropout();
                if p <= 0.0 {
                    return None;
                }
                let keep = 1.0 / (1.0 - p);
                let n = batch * model.size_at(l + 1);
                let data = (0..n).map(|_| if rng.uniform() < p { 0.0 } else { keep }).collect();
                Some(Tensor::new(vec![batch, model.size_at(l + 1)], data).expect("mask shape"))
            })
            .collect();
        DropoutMasks { masks }
    }

    pub fn get(&self, l: usize) -> Option<&Tensor> {
        self.masks.get(l).and_then(Option::as_ref)
    }
}

/// Record of one layer during a pass. All tensors are `[B × size]` with each
/// row holding one sample flattened row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerTrace {
    /// Pre-activation `a_ℓ` (for parameter-free layers, the layer output).
    pub pre: Tensor,
    /// `h_ℓ = σ_ℓ(a_ℓ) ⊙ m_ℓ`.
    pub post: Tensor,
    pub mask: Option<Tensor>,
    /// Max-pool winners, per sample index into that sample's input map.
    pub argmax: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActivationTrace {
    /// `h_0`: the network input (`x` or `x + F·e`), `[B × input_size]`.
    pub input: Tensor,
    pub layers: Vec<LayerTrace>,
}

impl ActivationTrace {
    pub fn batch_size(&self) -> usize {
        self.input.shape()[0]
    }

    /// `h_ℓ`; index 0 is the input.
    pub fn activation(&self, l: usize) -> &Tensor {
        if l == 0 {
            &self.input
        } else {
            &self.layers[l - 1].post
        }
    }

    pub fn output(&self) -> &Tensor {
        self.activation(self.layers.len())
    }

    /// Recomputes `h_ℓ` from the stored pre-activation and mask.
    pub fn recompute_post(&self, model: &Model, l: usize) -> Tensor {
        let layer = &model.layers()[l];
        let t = &self.layers[l];
        let h = layer.activation().apply(&t.pre);
        match &t.mask {
            Some(m) => h.mul(m).expect("mask shape"),
            None => h,
        }
    }
}

/// `x + F·e` for every sample: `[B × input] + [B × classes]·Fᵀ`.
pub fn modulated_input(model: &Model, x: &Tensor, e: &Tensor) -> Result<Tensor> {
    let shift = e.matmul_t(model.projection())?;
    x.add(&shift)
}

/// Standard pass `h_ℓ = σ_ℓ(W_ℓ h_{ℓ−1})`. Masks are used only when `training`.
pub fn forward_standard(model: &Model, x: &Tensor, masks: &DropoutMasks, training: bool) -> Result<ActivationTrace> {
    run(model, x.clone(), masks, training)
}

/// Modulated pass: the standard pass applied to `x + F·e`.
pub fn forward_modulated(
    model: &Model,
    x: &Tensor,
    e: &Tensor,
    masks: &DropoutMasks,
    training: bool,
) -> Result<ActivationTrace> {
    let (b, c) = e.dims2()?;
    if b != x.shape()[0] || c != model.num_classes() {
        return Err(Error::shape("error vector", e.shape(), &[x.shape()[0], model.num_classes()]));
    }
    run(model, modulated_input(model, x, e)?, masks, training)
}

fn run(model: &Model, input: Tensor, masks: &DropoutMasks, training: bool) -> Result<ActivationTrace> {
    let (batch, width) = input.dims2()?;
    if width != model.input_size() {
        return Err(Error::shape("network input", &[batch, width], &[batch, model.input_size()]));
    }
    input.ensure_finite("input", Some(0))?;
    let mut layers: Vec<LayerTrace> = Vec::with_capacity(model.num_layers());
    for (l, spec) in model.layers().iter().enumerate() {
        let prev = layers.last().map_or(&input, |t| &t.post);
        let trace = layer_forward(model, l, spec, prev, masks, training)?;
        trace.pre.ensure_finite("pre-activation", Some(l + 1))?;
        trace.post.ensure_finite("activation", Some(l + 1))?;
        layers.push(trace);
    }
    Ok(ActivationTrace { input, layers })
}

fn layer_forward(
    model: &Model,
    l: usize,
    spec: &LayerSpec,
    prev: &Tensor,
    masks: &DropoutMasks,
    training: bool,
) -> Result<LayerTrace> {
    let batch = prev.shape()[0];
    let in_shape = model.shape_at(l);
    let out_len = model.size_at(l + 1);
    match spec {
        LayerSpec::FullyConnected { activation, .. } => {
            let w = model.weight(l).expect("dense weights");
            let pre = prev.matmul_t(w)?;
            let mut post = activation.apply(&pre);
            let mask = if training { masks.get(l).cloned() } else { None };
            if let Some(m) = &mask {
                if m.shape() != post.shape() {
                    return Err(Error::shape("dropout mask", m.shape(), post.shape()));
                }
                post = post.mul(m)?;
            }
            Ok(LayerTrace { pre, post, mask, argmax: None })
        }
        LayerSpec::Conv { filters, kernel, stride, activation } => {
            let g = ConvGeometry::new(in_shape[0], in_shape[1], in_shape[2], *kernel, *stride)?;
            let w = model.weight(l).expect("conv filters");
            let in_len = g.input_len();
            let mut pre = vec![0.0; batch * out_len];
            pre.par_chunks_mut(out_len)
                .zip(prev.data().par_chunks(in_len))
                .for_each(|(out, x)| {
                    let cols = im2col(x, &g);
                    out.copy_from_slice(&conv_from_cols(w.data(), *filters, &cols, &g));
                });
            let pre = Tensor::new(vec![batch, out_len], pre)?;
            let post = activation.apply(&pre);
            Ok(LayerTrace { pre, post, mask: None, argmax: None })
        }
        LayerSpec::Maxpool { size, stride } => {
            let g = PoolGeometry::new(in_shape[0], in_shape[1], in_shape[2], *size, *stride)?;
            let in_len = in_shape.iter().product::<usize>();
            let mut out = vec![0.0; batch * out_len];
            let mut argmax = vec![0usize; batch * out_len];
            out.par_chunks_mut(out_len)
                .zip(argmax.par_chunks_mut(out_len))
                .zip(prev.data().par_chunks(in_len))
                .for_each(|((o, a), x)| maxpool_slice(x, &g, o, a));
            let post = Tensor::new(vec![batch, out_len], out)?;
            Ok(LayerTrace { pre: post.clone(), post, mask: None, argmax: Some(argmax) })
        }
        LayerSpec::Flatten => Ok(LayerTrace { pre: prev.clone(), post: prev.clone(), mask: None, argmax: None }),
    }
}
