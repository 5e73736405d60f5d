//! Shared outer-product and transpose-propagation kernels.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::network::{LayerSpec, Model};
use crate::numerics::{col2im_accumulate, im2col, outer_from_cols, ConvGeometry, Tensor};

pub(crate) fn conv_geometry(model: &Model, l: usize) -> Result<(ConvGeometry, usize)> {
    match &model.layers()[l] {
        LayerSpec::Conv { filters, kernel, stride, .. } => {
            let s = model.shape_at(l);
            Ok((ConvGeometry::new(s[0], s[1], s[2], *kernel, *stride)?, *filters))
        }
        other => Err(Error::Usage(format!("layer {l} is not convolutional: {other:?}"))),
    }
}

/// Weight-shaped outer product `scale · Σ_b post_b ⊗ pre_b`.
///
/// Dense: `postᵀ·pre`. Conv: for every output pixel, the post term at that
/// pixel times the input patch it was computed from, summed over pixels and
/// samples. Per-sample conv terms are summed in sample order.
pub(crate) fn weight_grad(model: &Model, l: usize, post: &Tensor, pre: &Tensor, scale: f64) -> Result<Tensor> {
    match &model.layers()[l] {
        LayerSpec::FullyConnected { .. } => Ok(post.t_matmul(pre)?.scale(scale)),
        LayerSpec::Conv { .. } => {
            let (g, k) = conv_geometry(model, l)?;
            let plen = g.patch_len();
            let out_len = k * g.positions();
            let per_sample: Vec<Vec<f64>> = post
                .data()
                .par_chunks(out_len)
                .zip(pre.data().par_chunks(g.input_len()))
                .map(|(d, x)| {
                    let cols = im2col(x, &g);
                    let mut acc = vec![0.0; k * plen];
                    outer_from_cols(d, k, &cols, &g, 1.0, &mut acc);
                    acc
                })
                .collect();
            let mut total = vec![0.0; k * plen];
            for part in &per_sample {
                for (t, v) in total.iter_mut().zip(part) {
                    *t += v;
                }
            }
            for t in &mut total {
                *t *= scale;
            }
            Tensor::new(vec![k, g.channels, g.kernel, g.kernel], total)
        }
        other => Err(Error::Usage(format!("layer {l} has no weights: {other:?}"))),
    }
}

/// Propagates `grad` (w.r.t. layer `l`'s pre-activation) to its input through
/// `matrix`: the forward weight for BP, a fixed feedback matrix for FA.
/// Dense feedback is stored as `[in × out]`, i.e. in place of `Wᵀ`.
pub(crate) fn input_grad(model: &Model, l: usize, grad: &Tensor, matrix: &Tensor, transposed: bool) -> Result<Tensor> {
    match &model.layers()[l] {
        LayerSpec::FullyConnected { .. } => {
            if transposed {
                grad.matmul_t(matrix)
            } else {
                grad.matmul(matrix)
            }
        }
        LayerSpec::Conv { .. } => {
            let (g, k) = conv_geometry(model, l)?;
            if matrix.len() != k * g.patch_len() {
                return Err(Error::shape("conv feedback", matrix.shape(), &[k, g.channels, g.kernel, g.kernel]));
            }
            let out_len = k * g.positions();
            let batch = grad.shape()[0];
            let mut out = vec![0.0; batch * g.input_len()];
            let filt = Tensor::new(vec![k, g.patch_len()], matrix.data().to_vec())?;
            out.par_chunks_mut(g.input_len())
                .zip(grad.data().par_chunks(out_len))
                .try_for_each(|(dst, d)| -> Result<()> {
                    let dm = Tensor::new(vec![k, g.positions()], d.to_vec())?;
                    let patches = dm.t_matmul(&filt)?;
                    col2im_accumulate(patches.data(), &g, dst);
                    Ok(())
                })?;
            Tensor::new(vec![batch, g.input_len()], out)
        }
        other => Err(Error::Usage(format!("layer {l} has no weights: {other:?}"))),
    }
}

/// Routes gradients back to the max-pool winners.
pub(crate) fn pool_backward(model: &Model, l: usize, grad: &Tensor, argmax: &[usize]) -> Result<Tensor> {
    let batch = grad.shape()[0];
    let in_len = model.size_at(l);
    let out_len = model.size_at(l + 1);
    let mut out = vec![0.0; batch * in_len];
    for b in 0..batch {
        for o in 0..out_len {
            out[b * in_len + argmax[b * out_len + o]] += grad.data()[b * out_len + o];
        }
    }
    Tensor::new(vec![batch, in_len], out)
}

/// Single-sample convolutional update: output-map differences `[K×H'×W']`
/// times the matching input patches of `input` `[C×H×W]`, summed over output
/// pixels and divided by the number of pixels. Returns `[K×C×k×k]`.
pub fn conv_filter_update(diff: &Tensor, input: &Tensor, kernel: usize, stride: usize) -> Result<Tensor> {
    let (c, h, w) = match input.shape() {
        &[c, h, w] => (c, h, w),
        other => return Err(Error::shape("conv update input must be C×H×W", other, &[0, 0, 0])),
    };
    let g = ConvGeometry::new(c, h, w, kernel, stride)?;
    let k = match diff.shape() {
        &[k, oh, ow] if oh == g.out_h && ow == g.out_w => k,
        other => return Err(Error::shape("conv update difference", other, &[0, g.out_h, g.out_w])),
    };
    let cols = im2col(input.data(), &g);
    let mut acc = vec![0.0; k * g.patch_len()];
    outer_from_cols(diff.data(), k, &cols, &g, 1.0 / g.positions() as f64, &mut acc);
    Tensor::new(vec![k, c, kernel, kernel], acc)
}
