use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{sample_normal, sample_uniform_sym, Rng, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionFamily {
    /// Uniform on `[−s, s]`.
    #[default]
    Uniform,
    /// Normal with standard deviation `s`.
    Normal,
}

/// How the fixed input projection `F` is drawn.
///
/// The width is `s = scale_factor · 2 · √(6 / n)` with `n` the model input
/// size, or `reference_size` when given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProjectionSpec {
    pub scale_factor: f64,
    pub family: ProjectionFamily,
    pub reference_size: Option<usize>,
}

impl Default for ProjectionSpec {
    fn default() -> Self {
        ProjectionSpec {
            scale_factor: 0.05,
            family: ProjectionFamily::Uniform,
            reference_size: None,
        }
    }
}

impl ProjectionSpec {
    pub fn width(&self, input_size: usize) -> f64 {
        let n = self.reference_size.unwrap_or(input_size);
        self.scale_factor * 2.0 * (6.0 / n as f64).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if !self.scale_factor.is_finite() || self.scale_factor < 0.0 {
            return Err(Error::Config(format!("projection scale factor {} must be finite and ≥ 0", self.scale_factor)));
        }
        if self.reference_size == Some(0) {
            return Err(Error::Config("projection reference size must be positive".into()));
        }
        Ok(())
    }

    /// `[input_size × num_classes]` matrix with i.i.d. entries.
    pub fn sample(&self, input_size: usize, num_classes: usize, rng: &mut Rng) -> Result<Tensor> {
        if input_size == 0 || num_classes == 0 {
            return Err(Error::Parameter(format!("projection dimensions {input_size}×{num_classes} must be positive")));
        }
        self.validate()?;
        let s = self.width(input_size);
        let shape = [input_size, num_classes];
        match self.family {
            ProjectionFamily::Uniform => sample_uniform_sym(rng, s, &shape),
            ProjectionFamily::Normal => sample_normal(rng, 0.0, s, &shape),
        }
    }
}

/// Uniform `F` with half-width `scale_factor · 2 · √(6 / input_size)`.
pub fn make_f(input_size: usize, num_classes: usize, scale_factor: f64, rng: &mut Rng) -> Result<Tensor> {
    ProjectionSpec { scale_factor, ..Default::default() }.sample(input_size, num_classes, rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn widths() {
        let spec = ProjectionSpec::default();
        assert!((spec.width(784) - 8.748e-3).abs() < 1e-6);
        assert!((spec.width(3072) - 4.419e-3).abs() < 1e-6);
        let table = ProjectionSpec { reference_size: Some(784), ..spec };
        assert_eq!(table.width(3072), spec.width(784));
    }

    #[test]
    fn support_and_zero_scale() {
        let mut rng = Rng::new(5);
        let f = make_f(784, 10, 0.05, &mut rng).unwrap();
        assert_eq!(f.shape(), &[784, 10]);
        let s = ProjectionSpec::default().width(784);
        assert!(f.data().iter().all(|v| v.abs() <= s));
        let z = make_f(784, 10, 0.0, &mut rng).unwrap();
        assert!(z.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn normal_family_std() {
        let spec = ProjectionSpec { family: ProjectionFamily::Normal, ..Default::default() };
        let f = spec.sample(784, 100, &mut Rng::new(1)).unwrap();
        let n = f.len() as f64;
        let std = (f.data().iter().map(|v| v * v).sum::<f64>() / n).sqrt();
        assert!((std / spec.width(784) - 1.0).abs() < 0.02);
    }
}
