use crate::error::{Error, Result};
use crate::network::Activation;
use crate::numerics::Tensor;

/// Mean loss over the batch, matched to the output nonlinearity:
/// cross-entropy for softmax, binary cross-entropy for sigmoid, and
/// half squared error otherwise.
pub fn batch_loss(output_activation: Activation, output: &Tensor, target: &Tensor) -> Result<f64> {
    if output.shape() != target.shape() {
        return Err(Error::shape("loss", output.shape(), target.shape()));
    }
    let (b, _) = output.dims2()?;
    let floor = f64::MIN_POSITIVE;
    let pairs = output.data().iter().zip(target.data());
    let total: f64 = match output_activation {
        Activation::Softmax => pairs.map(|(&h, &t)| if t != 0.0 { -t * h.max(floor).ln() } else { 0.0 }).sum(),
        Activation::Sigmoid => pairs
            .map(|(&h, &t)| -(t * h.max(floor).ln() + (1.0 - t) * (1.0 - h).max(floor).ln()))
            .sum(),
        _ => pairs.map(|(&h, &t)| 0.5 * (h - t) * (h - t)).sum(),
    };
    Ok(total / b as f64)
}

/// Gradient of the per-sample loss with respect to the output pre-activation.
/// For softmax/cross-entropy, sigmoid/binary cross-entropy and identity/squared
/// error this is exactly `h − target`.
pub fn output_delta(output_activation: Activation, pre: &Tensor, output: &Tensor, target: &Tensor) -> Result<Tensor> {
    let diff = output.sub(target)?;
    Ok(match output_activation {
        Activation::Softmax | Activation::Sigmoid | Activation::Identity => diff,
        act => diff.zip_map(pre, |d, a| d * act.derivative(a))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_entropy_at_uniform() {
        let h = Tensor::from_rows(&[[0.5, 0.5]]).unwrap();
        let t = Tensor::from_rows(&[[1.0, 0.0]]).unwrap();
        assert!((batch_loss(Activation::Softmax, &h, &t).unwrap() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn saturated_output_stays_finite() {
        let h = Tensor::from_rows(&[[0.0, 1.0]]).unwrap();
        let t = Tensor::from_rows(&[[1.0, 0.0]]).unwrap();
        assert!(batch_loss(Activation::Softmax, &h, &t).unwrap().is_finite());
        assert!(batch_loss(Activation::Sigmoid, &h, &t).unwrap().is_finite());
    }
}
