//! Analysis quantities: forward-product / projection alignment, weight norms,
//! weight histograms and update sign agreement.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::network::{LayerSpec, Model};
use crate::numerics::Tensor;
use crate::rules::UpdateSet;

/// Angle in degrees between two tensors viewed as flat vectors.
pub fn angle_between(a: &Tensor, b: &Tensor) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::shape("angle operands", a.shape(), b.shape()));
    }
    let (na, nb) = (a.frobenius_norm(), b.frobenius_norm());
    if na == 0.0 || nb == 0.0 {
        return Err(Error::UndefinedAngle);
    }
    let dot: f64 = a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0).acos().to_degrees())
}

/// Angle between `P = W_L ⋯ W_1` (`[out × input]`) and `Fᵀ`, with `weights`
/// ordered from the input side and `f` shaped `[input × out]`.
pub fn alignment_angle(weights: &[&Tensor], f: &Tensor) -> Result<f64> {
    let (first, rest) = weights
        .split_first()
        .ok_or_else(|| Error::Parameter("alignment angle needs at least one weight matrix".into()))?;
    let mut p = (*first).clone();
    for w in rest {
        p = w.matmul(&p)?;
    }
    let ft = f.transpose()?;
    if p.shape() != ft.shape() {
        return Err(Error::shape("forward product vs projection", p.shape(), ft.shape()));
    }
    angle_between(&p, &ft)
}

/// [`alignment_angle`] over every weight of an all-dense model.
pub fn model_alignment_angle(model: &Model) -> Result<f64> {
    if model.layers().iter().any(|l| matches!(l, LayerSpec::Conv { .. })) {
        return Err(Error::Usage("alignment angle is defined for fully connected models only".into()));
    }
    let ws: Vec<&Tensor> = model.weights().iter().flatten().collect();
    alignment_angle(&ws, model.projection())
}

pub fn weight_norm(w: &Tensor) -> f64 {
    w.frobenius_norm()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// `bins + 1` edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

/// Histogram over `range` (default: data min..max). Values outside the range
/// fall into the end bins, so counts always sum to the tensor size.
pub fn weight_histogram(w: &Tensor, bins: usize, range: Option<(f64, f64)>) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::Parameter("histogram needs at least one bin".into()));
    }
    if w.is_empty() {
        return Err(Error::Parameter("histogram of an empty tensor".into()));
    }
    let data = w.data();
    let min = data.iter().copied().fold(f64::INFINITY, f64::min);
    let max = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = match range {
        Some((lo, hi)) => {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Parameter(format!("degenerate histogram range [{lo}, {hi}]")));
            }
            (lo, hi)
        }
        None if min == max => (min - 0.5, max + 0.5),
        None => (min, max),
    };
    let width = (hi - lo) / bins as f64;
    let edges = (0..=bins).map(|i| lo + width * i as f64).collect();
    let mut counts = vec![0; bins];
    for &v in data {
        let i = ((v - lo) / width).floor();
        counts[(i.max(0.0) as usize).min(bins - 1)] += 1;
    }
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let var = data.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok(Histogram { edges, counts, mean, std: var.sqrt(), min, max })
}

/// Appends `epoch,layer,bin_lo,bin_hi,count` rows; writes the header when
/// `header` is set.
pub fn write_histogram_rows(out: &mut impl Write, epoch: usize, layer: usize, h: &Histogram, header: bool) -> std::io::Result<()> {
    if header {
        writeln!(out, "epoch,layer,bin_lo,bin_hi,count")?;
    }
    for (i, c) in h.counts.iter().enumerate() {
        writeln!(out, "{epoch},{layer},{},{},{c}", h.edges[i], h.edges[i + 1])?;
    }
    Ok(())
}

/// Single-histogram CSV file.
pub fn write_histogram_csv(path: &Path, h: &Histogram) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    writeln!(f, "bin_lo,bin_hi,count")
        .and_then(|_| {
            h.counts
                .iter()
                .enumerate()
                .try_for_each(|(i, c)| writeln!(f, "{},{},{c}", h.edges[i], h.edges[i + 1]))
        })
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// Fraction of entries whose signs agree (zero counts as its own sign),
/// pooled over the layers both sets update.
pub fn sign_agreement(a: &UpdateSet, b: &UpdateSet) -> Result<f64> {
    let (mut same, mut total) = (0usize, 0usize);
    for (da, db) in a.deltas.iter().zip(&b.deltas) {
        if let (Some(da), Some(db)) = (da, db) {
            if da.shape() != db.shape() {
                return Err(Error::shape("sign agreement", da.shape(), db.shape()));
            }
            total += da.len();
            same += da.data().iter().zip(db.data()).filter(|(x, y)| sign(**x) == sign(**y)).count();
        }
    }
    if total == 0 {
        return Err(Error::Parameter("no common layers to compare".into()));
    }
    Ok(same as f64 / total as f64)
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{InitSpec, ModelConfig};
    use crate::numerics::{sample_normal, Rng};

    #[test]
    fn angle_cases() {
        let f = Tensor::from_rows(&[[1.0, 2.0], [3.0, -1.0], [0.5, 0.0]]).unwrap();
        let ft = f.transpose().unwrap();
        let id = Tensor::eye(3);
        let w2 = ft.scale(2.5);
        assert!(alignment_angle(&[&id, &w2], &f).unwrap().abs() < 1e-5);
        let w2n = ft.scale(-0.3);
        assert!((alignment_angle(&[&id, &w2n], &f).unwrap() - 180.0).abs() < 1e-5);
        let a = Tensor::from_rows(&[[1.0, 0.0]]).unwrap();
        let b = Tensor::from_rows(&[[0.0, 4.0]]).unwrap();
        assert!((angle_between(&a, &b).unwrap() - 90.0).abs() < 1e-12);
        assert!(matches!(angle_between(&a, &Tensor::zeros(vec![1, 2])), Err(Error::UndefinedAngle)));
    }

    #[test]
    fn angle_scaling_and_negation() {
        let mut rng = Rng::new(4);
        let a = sample_normal(&mut rng, 0.0, 1.0, &[5, 6]).unwrap();
        let b = sample_normal(&mut rng, 0.0, 1.0, &[5, 6]).unwrap();
        let t = angle_between(&a, &b).unwrap();
        assert!((angle_between(&a.scale(7.0), &b.scale(0.01)).unwrap() - t).abs() < 1e-9);
        assert!((angle_between(&a.scale(-1.0), &b).unwrap() - (180.0 - t)).abs() < 1e-9);
    }

    #[test]
    fn near_orthogonal_at_init() {
        let cfg = ModelConfig::fully_connected([1, 28, 28], &[1024], 10, 0.1);
        let m = Model::build(&cfg, &InitSpec::default(), 11).unwrap();
        let a = model_alignment_angle(&m).unwrap();
        assert!((85.0..=95.0).contains(&a), "{a}");
    }

    #[test]
    fn norms() {
        assert_eq!(weight_norm(&Tensor::zeros(vec![3, 3])), 0.0);
        assert_eq!(weight_norm(&Tensor::from_rows(&[[3.0, 4.0]]).unwrap()), 5.0);
        let w = sample_normal(&mut Rng::new(1), 0.0, 1.0, &[13, 7]).unwrap();
        let oracle = w.data().iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((weight_norm(&w) - oracle).abs() < 1e-12);
    }

    #[test]
    fn histograms() {
        let h = weight_histogram(&Tensor::full(vec![4, 4], 0.2), 10, None).unwrap();
        assert_eq!(h.counts.iter().filter(|&&c| c > 0).count(), 1);
        assert!(h.std < 1e-15);
        let w = sample_normal(&mut Rng::new(2), 0.0, 1.0, &[50, 20]).unwrap();
        for range in [None, Some((-0.5, 0.5))] {
            let h = weight_histogram(&w, 17, range).unwrap();
            assert_eq!(h.counts.iter().sum::<usize>(), 1000);
        }
        assert!(weight_histogram(&w, 5, Some((1.0, 1.0))).is_err());
        assert!(weight_histogram(&w, 0, None).is_err());
    }
}
