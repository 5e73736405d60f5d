use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{sample_normal, Concern, Rng, Tensor};
use crate::trainer::ProjectionSpec;

use super::{LayerSpec, ModelConfig};

/// Which fixed random feedback matrices a model carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackKind {
    #[default]
    None,
    /// Feedback alignment: one matrix per trainable layer above the first,
    /// shaped like the transposed forward weight (conv: like the filter bank).
    Alignment,
    /// Direct random target projection: one `[out_size × classes]` matrix per hidden trainable layer.
    DirectTarget,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitSpec {
    pub projection: ProjectionSpec,
    pub feedback: FeedbackKind,
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec {
            projection: ProjectionSpec::default(),
            feedback: FeedbackKind::None,
        }
    }
}

/// Layer stack plus parameters: trainable weights, the fixed input projection
/// `F` (`[input_size × classes]`), and optional fixed feedback matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    config: ModelConfig,
    shapes: Vec<Vec<usize>>,
    weights: Vec<Option<Tensor>>,
    projection: Tensor,
    feedback: Vec<Option<Tensor>>,
}

fn weight_shape(layer: &LayerSpec, input: &[usize]) -> Option<Vec<usize>> {
    match layer {
        LayerSpec::FullyConnected { units, .. } => Some(vec![*units, input.iter().product()]),
        LayerSpec::Conv { filters, kernel, .. } => Some(vec![*filters, input[0], *kernel, *kernel]),
        _ => None,
    }
}

fn fan_in(shape: &[usize]) -> usize {
    shape[1..].iter().product()
}

impl Model {
    /// He-normal weights, projection per `init.projection`, feedback per `init.feedback`.
    /// Each parameter family draws from its own stream of `seed`.
    pub fn build(config: &ModelConfig, init: &InitSpec, seed: u64) -> Result<Model> {
        let shapes = config.shapes()?;
        let mut wrng = Rng::for_concern(seed, Concern::Weights);
        let mut weights = Vec::with_capacity(config.layers.len());
        for (l, layer) in config.layers.iter().enumerate() {
            weights.push(match weight_shape(layer, &shapes[l]) {
                Some(shape) => {
                    let std = (2.0 / fan_in(&shape) as f64).sqrt();
                    Some(sample_normal(&mut wrng, 0.0, std, &shape)?)
                }
                None => None,
            });
        }

        let mut frng = Rng::for_concern(seed, Concern::Projection);
        let projection = init.projection.sample(config.input_size(), config.num_classes, &mut frng)?;

        let mut brng = Rng::for_concern(seed, Concern::Feedback);
        let trainable: Vec<usize> = (0..config.layers.len()).filter(|&l| weights[l].is_some()).collect();
        let mut feedback = vec![None; config.layers.len()];
        for (pos, &l) in trainable.iter().enumerate() {
            let w_shape = weights[l].as_ref().unwrap().shape().to_vec();
            let std = (2.0 / fan_in(&w_shape) as f64).sqrt();
            let shape = match init.feedback {
                FeedbackKind::None => None,
                FeedbackKind::Alignment if pos > 0 => Some(match config.layers[l] {
                    LayerSpec::Conv { .. } => w_shape.clone(),
                    _ => vec![w_shape[1], w_shape[0]],
                }),
                FeedbackKind::DirectTarget if pos + 1 < trainable.len() => {
                    Some(vec![shapes[l + 1].iter().product(), config.num_classes])
                }
                _ => None,
            };
            if let Some(shape) = shape {
                feedback[l] = Some(sample_normal(&mut brng, 0.0, std, &shape)?);
            }
        }

        Ok(Model {
            config: config.clone(),
            shapes,
            weights,
            projection,
            feedback,
        })
    }

    /// Assembles a model from explicit parameters, checking every shape.
    pub fn from_parts(
        config: &ModelConfig,
        weights: Vec<Option<Tensor>>,
        projection: Tensor,
        feedback: Vec<Option<Tensor>>,
    ) -> Result<Model> {
        let shapes = config.shapes()?;
        let n = config.layers.len();
        if weights.len() != n || feedback.len() != n {
            return Err(Error::shape("per-layer parameter lists", &[n], &[weights.len(), feedback.len()]));
        }
        for (l, layer) in config.layers.iter().enumerate() {
            let expected = weight_shape(layer, &shapes[l]);
            let got = weights[l].as_ref().map(|w| w.shape().to_vec());
            if expected != got {
                return Err(Error::shape(
                    "layer weight",
                    &expected.unwrap_or_default(),
                    &got.unwrap_or_default(),
                ));
            }
        }
        let f_shape = [config.input_size(), config.num_classes];
        if projection.shape() != f_shape {
            return Err(Error::shape("projection matrix", &f_shape, projection.shape()));
        }
        Ok(Model {
            config: config.clone(),
            shapes,
            weights,
            projection,
            feedback,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.config.layers
    }

    pub fn num_layers(&self) -> usize {
        self.config.layers.len()
    }

    /// Shape of `h_ℓ` (0 = input).
    pub fn shape_at(&self, l: usize) -> &[usize] {
        &self.shapes[l]
    }

    pub fn size_at(&self, l: usize) -> usize {
        self.shapes[l].iter().product()
    }

    pub fn input_size(&self) -> usize {
        self.config.input_size()
    }

    pub fn num_classes(&self) -> usize {
        self.config.num_classes
    }

    pub fn trainable_layers(&self) -> Vec<usize> {
        (0..self.num_layers()).filter(|&l| self.weights[l].is_some()).collect()
    }

    pub fn weight(&self, l: usize) -> Option<&Tensor> {
        self.weights[l].as_ref()
    }

    pub fn weights(&self) -> &[Option<Tensor>] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [Option<Tensor>] {
        &mut self.weights
    }

    pub fn set_weight(&mut self, l: usize, w: Tensor) -> Result<()> {
        match &self.weights[l] {
            Some(old) if old.shape() == w.shape() => {
                self.weights[l] = Some(w);
                Ok(())
            }
            Some(old) => Err(Error::shape("set_weight", old.shape(), w.shape())),
            None => Err(Error::Usage(format!("layer {l} has no weights"))),
        }
    }

    /// The fixed matrix `F`, `[input_size × classes]`.
    pub fn projection(&self) -> &Tensor {
        &self.projection
    }

    pub fn set_projection(&mut self, f: Tensor) -> Result<()> {
        if f.shape() != self.projection.shape() {
            return Err(Error::shape("set_projection", self.projection.shape(), f.shape()));
        }
        self.projection = f;
        Ok(())
    }

    pub fn feedback(&self, l: usize) -> Option<&Tensor> {
        self.feedback[l].as_ref()
    }

    pub fn feedbacks(&self) -> &[Option<Tensor>] {
        &self.feedback
    }

    pub fn set_feedback(&mut self, l: usize, b: Option<Tensor>) {
        self.feedback[l] = b;
    }
}
