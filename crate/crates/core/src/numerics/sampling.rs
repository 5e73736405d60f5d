use crate::error::{Error, Result};

use super::{Rng, Tensor};

/// I.i.d. normal entries.
pub fn sample_normal(rng: &mut Rng, mean: f64, std: f64, shape: &[usize]) -> Result<Tensor> {
    if !(std.is_finite() && std >= 0.0) {
        return Err(Error::Parameter(format!(
            "normal std must be finite and nonnegative, got {std}"
        )));
    }
    let n: usize = shape.iter().product();
    let data = (0..n).map(|_| mean + std * rng.standard_normal()).collect();
    Tensor::new(shape.to_vec(), data)
}

/// I.i.d. uniform entries on `[-half_width, half_width]`, drawn as `(2u - 1)·half_width`.
pub fn sample_uniform_sym(rng: &mut Rng, half_width: f64, shape: &[usize]) -> Result<Tensor> {
    if !(half_width.is_finite() && half_width >= 0.0) {
        return Err(Error::Parameter(format!(
            "uniform half-width must be finite and nonnegative, got {half_width}"
        )));
    }
    let n: usize = shape.iter().product();
    let data = (0..n)
        .map(|_| (2.0 * rng.uniform() - 1.0) * half_width)
        .collect();
    Tensor::new(shape.to_vec(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(t: &Tensor) -> (f64, f64) {
        let n = t.len() as f64;
        let mean = t.sum() / n;
        let var = t.data().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var.sqrt())
    }

    #[test]
    fn zero_std_is_constant() {
        let t = sample_normal(&mut Rng::new(1), 3.5, 0.0, &[4, 5]).unwrap();
        assert!(t.data().iter().all(|&v| v == 3.5));
    }

    #[test]
    fn normal_moments() {
        let t = sample_normal(&mut Rng::new(2), 0.0, 1.0, &[100_000]).unwrap();
        let (mean, std) = moments(&t);
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((std - 1.0).abs() < 0.02, "std {std}");
    }

    #[test]
    fn normal_is_reproducible() {
        let a = sample_normal(&mut Rng::new(9), 0.0, 1.0, &[64]).unwrap();
        let b = sample_normal(&mut Rng::new(9), 0.0, 1.0, &[64]).unwrap();
        assert_eq!(a.data(), b.data());
    }

    #[test]
    fn negative_parameters_rejected() {
        assert!(matches!(
            sample_normal(&mut Rng::new(0), 0.0, -1.0, &[1]),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            sample_uniform_sym(&mut Rng::new(0), -0.1, &[1]),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn uniform_zero_width() {
        let t = sample_uniform_sym(&mut Rng::new(4), 0.0, &[10]).unwrap();
        assert!(t.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn uniform_support_and_spread() {
        let h = 0.3;
        let t = sample_uniform_sym(&mut Rng::new(5), h, &[100_000]).unwrap();
        assert!(t.data().iter().all(|&v| (-h..=h).contains(&v)));
        let (_, std) = moments(&t);
        let expected = h / 3f64.sqrt();
        assert!((std - expected).abs() / expected < 0.03, "std {std}");
    }
}
