use serde::{Deserialize, Serialize};

use crate::numerics::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Tanh,
    Sigmoid,
    Softmax,
    Identity,
}

pub fn relu(a: f64) -> f64 {
    if a > 0.0 {
        a
    } else {
        0.0
    }
}

pub fn sigmoid(a: f64) -> f64 {
    if a >= 0.0 {
        1.0 / (1.0 + (-a).exp())
    } else {
        let z = a.exp();
        z / (1.0 + z)
    }
}

pub fn tanh(a: f64) -> f64 {
    a.tanh()
}

/// Max-shifted softmax.
pub fn softmax(a: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len());
    softmax_into(a, &mut out);
    out
}

fn softmax_into(a: &[f64], out: &mut Vec<f64>) {
    let max = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let start = out.len();
    let mut sum = 0.0;
    for &v in a {
        let e = (v - max).exp();
        sum += e;
        out.push(e);
    }
    for v in &mut out[start..] {
        *v /= sum;
    }
}

impl Activation {
    /// Applies the nonlinearity; softmax acts on each row of a `[B × n]` tensor.
    pub fn apply(&self, pre: &Tensor) -> Tensor {
        match self {
            Activation::Relu => pre.map(relu),
            Activation::Tanh => pre.map(tanh),
            Activation::Sigmoid => pre.map(sigmoid),
            Activation::Identity => pre.clone(),
            Activation::Softmax => {
                let cols = pre.shape().last().copied().unwrap_or(1).max(1);
                let mut out = Vec::with_capacity(pre.len());
                for row in pre.data().chunks(cols) {
                    softmax_into(row, &mut out);
                }
                Tensor::new(pre.shape().to_vec(), out).expect("softmax keeps shape")
            }
        }
    }

    /// Elementwise derivative `σ'(a)`; the ReLU derivative at exactly 0 is 0.
    /// Softmax has no elementwise derivative; it is only used paired with
    /// cross-entropy at the output, where the delta is `h − target`.
    pub fn derivative(&self, pre: f64) -> f64 {
        match self {
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => {
                let t = pre.tanh();
                1.0 - t * t
            }
            Activation::Sigmoid => {
                let s = sigmoid(pre);
                s * (1.0 - s)
            }
            Activation::Identity => 1.0,
            Activation::Softmax => panic!("softmax derivative is not elementwise"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relu_clips() {
        let t = Tensor::new(vec![2], vec![-1.0, 2.0]).unwrap();
        assert_eq!(Activation::Relu.apply(&t).data(), &[0.0, 2.0]);
    }

    #[test]
    fn softmax_uniform_and_stable() {
        let s = softmax(&[0.0, 0.0, 0.0]);
        assert!(s.iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-15));
        assert_eq!(softmax(&[1000.0, 1000.0]), vec![0.5, 0.5]);
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let t = Tensor::new(vec![2, 3], vec![1.0, -2.0, 30.0, 0.1, 0.2, 0.3]).unwrap();
        let s = Activation::Softmax.apply(&t);
        for r in 0..2 {
            let row = s.row(r);
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(row.iter().all(|&v| v > 0.0 && v < 1.0));
        }
    }

    #[test]
    fn sigmoid_and_tanh_symmetry() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0).is_finite());
        for z in [0.3, 1.7, -2.2, 9.0] {
            assert_eq!(tanh(-z), -tanh(z));
        }
    }

    #[test]
    fn relu_derivative_at_zero() {
        assert_eq!(Activation::Relu.derivative(0.0), 0.0);
    }
}
