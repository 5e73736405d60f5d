//! Direct random target projection: hidden layers learn from a fixed random
//! projection of the target, the output layer from its true error.

use crate::error::{Error, Result};
use crate::network::{ActivationTrace, Model};
use crate::numerics::Tensor;

use super::backprop::through_activation;
use super::grad::weight_grad;
use super::{check_target, check_trace, output_delta, Rule, UpdateSet};

/// Hidden layer `ℓ`: signal `(B_ℓ·target) ⊙ σ'(a_ℓ)`, `ΔW_ℓ = signal·h_{ℓ−1}ᵀ`.
/// Output: `(h_L − target)·h_{L−1}ᵀ` (the binary cross-entropy delta for a
/// sigmoid output).
pub fn drtp_update(model: &Model, trace: &ActivationTrace, target: &Tensor) -> Result<UpdateSet> {
    check_trace(model, trace)?;
    check_target(trace, target)?;
    let trainable = model.trainable_layers();
    let last = *trainable.last().expect("validated models end in a dense layer");
    let batch = trace.batch_size() as f64;
    let mut deltas = vec![None; model.num_layers()];
    for &l in &trainable {
        let signal = if l == last {
            let out = &trace.layers[l];
            output_delta(model.layers()[l].activation(), &out.pre, &out.post, target)?
        } else {
            let b = model
                .feedback(l)
                .ok_or_else(|| Error::Usage(format!("target projection needs a feedback matrix at layer {l}")))?;
            through_activation(model, trace, l, target.matmul_t(b)?)?
        };
        deltas[l] = Some(weight_grad(model, l, &signal, trace.activation(l), 1.0 / batch)?);
    }
    let set = UpdateSet { rule: Rule::Drtp, deltas };
    set.validate(model)?;
    Ok(set)
}
