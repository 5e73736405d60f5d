//! Exact loss gradients (BP) and their feedback-alignment counterpart (FA),
//! which swaps each transposed forward matrix for a fixed random one.

use crate::error::{Error, Result};
use crate::network::{ActivationTrace, LayerSpec, Model};
use crate::numerics::Tensor;

use super::grad::{input_grad, pool_backward, weight_grad};
use super::{check_target, check_trace, output_delta, Rule, UpdateSet};

pub fn bp_update(model: &Model, trace: &ActivationTrace, target: &Tensor) -> Result<UpdateSet> {
    backward(model, trace, target, false)
}

pub fn fa_update(model: &Model, trace: &ActivationTrace, target: &Tensor) -> Result<UpdateSet> {
    backward(model, trace, target, true)
}

/// Converts a gradient w.r.t. `h_ℓ` into one w.r.t. `a_ℓ` through the dropout
/// mask and the activation derivative.
pub(crate) fn through_activation(model: &Model, trace: &ActivationTrace, l: usize, grad: Tensor) -> Result<Tensor> {
    let layer = &model.layers()[l];
    if !layer.is_trainable() {
        return Ok(grad);
    }
    let act = layer.activation();
    let t = &trace.layers[l];
    let mut g = grad.zip_map(&t.pre, |g, a| g * act.derivative(a))?;
    if let Some(m) = &t.mask {
        g = g.mul(m)?;
    }
    Ok(g)
}

fn backward(model: &Model, trace: &ActivationTrace, target: &Tensor, use_feedback: bool) -> Result<UpdateSet> {
    check_trace(model, trace)?;
    check_target(trace, target)?;
    let n = model.num_layers();
    let first = model.trainable_layers()[0];
    let batch = trace.batch_size() as f64;
    let out = &trace.layers[n - 1];
    let mut grad_pre = output_delta(model.layers()[n - 1].activation(), &out.pre, &out.post, target)?;
    let mut deltas = vec![None; n];

    for l in (0..n).rev() {
        let grad_in = match &model.layers()[l] {
            LayerSpec::FullyConnected { .. } | LayerSpec::Conv { .. } => {
                deltas[l] = Some(weight_grad(model, l, &grad_pre, trace.activation(l), 1.0 / batch)?);
                if l <= first {
                    break;
                }
                let (matrix, transposed) = if use_feedback {
                    let b = model
                        .feedback(l)
                        .ok_or_else(|| Error::Usage(format!("feedback alignment needs a feedback matrix at layer {l}")))?;
                    (b, true)
                } else {
                    (model.weight(l).expect("trainable"), false)
                };
                input_grad(model, l, &grad_pre, matrix, transposed)?
            }
            LayerSpec::Maxpool { .. } => {
                let argmax = trace.layers[l].argmax.as_deref().expect("pool trace records winners");
                pool_backward(model, l, &grad_pre, argmax)?
            }
            LayerSpec::Flatten => grad_pre,
        };
        grad_pre = through_activation(model, trace, l - 1, grad_in)?;
    }
    let set = UpdateSet {
        rule: if use_feedback { Rule::Fa } else { Rule::Bp },
        deltas,
    };
    set.validate(model)?;
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{forward_standard, Activation, DropoutMasks, FeedbackKind, InitSpec, ModelConfig};
    use crate::numerics::{sample_uniform_sym, Rng};

    #[test]
    fn single_layer_softmax_hand_value() {
        let cfg = ModelConfig::fully_connected([1, 1, 2], &[], 2, 0.0);
        let m = Model::from_parts(&cfg, vec![Some(Tensor::zeros(vec![2, 2]))], Tensor::zeros(vec![2, 2]), vec![None])
            .unwrap();
        let x = Tensor::from_rows(&[[1.0, 0.0]]).unwrap();
        let t = Tensor::from_rows(&[[1.0, 0.0]]).unwrap();
        let tr = forward_standard(&m, &x, &DropoutMasks::none(&m), true).unwrap();
        let up = bp_update(&m, &tr, &t).unwrap();
        assert_eq!(up.delta(0).unwrap().data(), &[-0.5, 0.0, 0.5, 0.0]);
    }

    #[test]
    fn fa_with_transposed_feedback_is_bp() {
        let cfg = ModelConfig::fully_connected([1, 3, 3], &[7, 5], 4, 0.25);
        let mut m = Model::build(&cfg, &InitSpec { feedback: FeedbackKind::Alignment, ..Default::default() }, 9).unwrap();
        for l in 1..3 {
            let wt = m.weight(l).unwrap().transpose().unwrap();
            m.set_feedback(l, Some(wt));
        }
        let mut rng = Rng::new(2);
        let x = sample_uniform_sym(&mut rng, 1.0, &[6, 9]).unwrap();
        let t = crate::datasets::one_hot(&[0, 1, 2, 3, 0, 1], 4);
        let masks = DropoutMasks::sample(&m, 6, &mut rng);
        let tr = forward_standard(&m, &x, &masks, true).unwrap();
        let bp = bp_update(&m, &tr, &t).unwrap();
        let fa = fa_update(&m, &tr, &t).unwrap();
        for l in 0..3 {
            assert!(bp.delta(l).unwrap().max_abs_diff(fa.delta(l).unwrap()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn fa_two_layer_hand_oracle() {
        // x=(1,2), W1=[[1,0],[0,1]] identity act, W2=[[1,1]] identity act, target 0, B2=[[2],[−1]]
        let cfg = ModelConfig {
            input_shape: [1, 1, 2],
            num_classes: 1,
            layers: vec![
                LayerSpec::FullyConnected { units: 2, activation: Activation::Identity, dropout: 0.0 },
                LayerSpec::FullyConnected { units: 1, activation: Activation::Identity, dropout: 0.0 },
            ],
        };
        let m = Model::from_parts(
            &cfg,
            vec![Some(Tensor::eye(2)), Some(Tensor::from_rows(&[[1.0, 1.0]]).unwrap())],
            Tensor::zeros(vec![2, 1]),
            vec![None, Some(Tensor::from_rows(&[[2.0], [-1.0]]).unwrap())],
        )
        .unwrap();
        let x = Tensor::from_rows(&[[1.0, 2.0]]).unwrap();
        let t = Tensor::from_rows(&[[0.0]]).unwrap();
        let tr = forward_standard(&m, &x, &DropoutMasks::none(&m), true).unwrap();
        let up = fa_update(&m, &tr, &t).unwrap();
        // y = 3, δ2 = 3; ΔW2 = 3·(1,2); δ1 = B2·3 = (6,−3); ΔW1 = δ1 xᵀ
        assert_eq!(up.delta(1).unwrap().data(), &[3.0, 6.0]);
        assert_eq!(up.delta(0).unwrap().data(), &[6.0, 12.0, -3.0, -6.0]);
    }

    #[test]
    fn fa_requires_feedback() {
        let cfg = ModelConfig::fully_connected([1, 2, 2], &[3], 2, 0.0);
        let m = Model::build(&cfg, &InitSpec::default(), 0).unwrap();
        let x = Tensor::zeros(vec![1, 4]);
        let tr = forward_standard(&m, &x, &DropoutMasks::none(&m), true).unwrap();
        assert!(matches!(fa_update(&m, &tr, &Tensor::zeros(vec![1, 2])), Err(Error::Usage(_))));
    }
}
