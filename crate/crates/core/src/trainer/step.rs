use serde::{Deserialize, Serialize};

use crate::datasets::LabeledDataset;
use crate::error::{Error, Result};
use crate::network::{forward_modulated, forward_standard, DropoutMasks, InitSpec, Model};
use crate::numerics::{Rng, Tensor};
use crate::rules::{batch_loss, bp_update, drtp_update, error_vector, fa_update, pepita_update, Presynaptic, Rule, UpdateSet};

use super::optimizer::{sgd_momentum_step, Decay, OptimizerState};
use super::projection::ProjectionSpec;

fn default_momentum() -> f64 {
    0.9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub rule: Rule,
    pub learning_rate: f64,
    #[serde(default = "default_momentum")]
    pub momentum: f64,
    #[serde(default)]
    pub decay: Vec<Decay>,
    pub batch_size: usize,
    pub epochs: usize,
    #[serde(default)]
    pub projection: ProjectionSpec,
    #[serde(default)]
    pub seed: u64,
    /// Serial reductions only and no wall-clock values in the metrics file.
    #[serde(default)]
    pub exact_repro: bool,
    /// Draw fresh dropout masks for the modulated pass instead of reusing
    /// the standard pass's masks.
    #[serde(default)]
    pub independent_masks: bool,
}

impl TrainConfig {
    pub fn new(rule: Rule, learning_rate: f64, batch_size: usize, epochs: usize) -> Self {
        TrainConfig {
            rule,
            learning_rate,
            momentum: default_momentum(),
            decay: Vec::new(),
            batch_size,
            epochs,
            projection: ProjectionSpec::default(),
            seed: 0,
            exact_repro: false,
            independent_masks: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config(format!("learning rate {} must be positive and finite", self.learning_rate)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(format!("momentum {} must lie in [0, 1)", self.momentum)));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        for pair in self.decay.windows(2) {
            if pair[1].epoch <= pair[0].epoch {
                return Err(Error::Config(format!(
                    "decay epochs must be strictly increasing ({} then {})",
                    pair[0].epoch, pair[1].epoch
                )));
            }
        }
        if let Some(d) = self.decay.iter().find(|d| !(d.factor.is_finite() && d.factor > 0.0)) {
            return Err(Error::Config(format!("decay factor {} must be positive and finite", d.factor)));
        }
        self.projection.validate()
    }

    pub fn lr_at_epoch(&self, epoch: usize) -> f64 {
        super::lr_at_epoch(self.learning_rate, &self.decay, epoch)
    }

    pub fn init_spec(&self) -> InitSpec {
        InitSpec {
            projection: self.projection,
            feedback: self.rule.feedback_kind(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepMetrics {
    /// Batch-mean loss of the standard pass (dropout active).
    pub loss: f64,
    pub correct: usize,
    pub batch: usize,
}

/// Rule updates for one batch without touching the weights. Both passes of
/// a forward-only rule use `masks`.
pub fn compute_updates(model: &Model, x: &Tensor, target: &Tensor, rule: Rule, masks: &DropoutMasks) -> Result<(UpdateSet, StepMetrics)> {
    compute_updates_with(model, x, target, rule, masks, masks)
}

/// As [`compute_updates`], with separate masks for the modulated pass.
pub fn compute_updates_with(
    model: &Model,
    x: &Tensor,
    target: &Tensor,
    rule: Rule,
    masks: &DropoutMasks,
    modulated_masks: &DropoutMasks,
) -> Result<(UpdateSet, StepMetrics)> {
    let std = forward_standard(model, x, masks, true)?;
    let out_act = model.layers().last().expect("non-empty model").activation();
    let loss = batch_loss(out_act, std.output(), target)?;
    if !loss.is_finite() {
        return Err(Error::divergence("loss", None));
    }
    let metrics = StepMetrics {
        loss,
        correct: count_correct(std.output(), target),
        batch: std.batch_size(),
    };
    let updates = match rule {
        Rule::Pepita | Rule::PepitaVariant => {
            let e = error_vector(std.output(), target)?;
            let modulated = forward_modulated(model, x, &e, modulated_masks, true)?;
            let presyn = if rule == Rule::Pepita { Presynaptic::Modulated } else { Presynaptic::Standard };
            pepita_update(model, &std, &modulated, &e, presyn)?
        }
        Rule::Bp => bp_update(model, &std, target)?,
        Rule::Fa => fa_update(model, &std, target)?,
        Rule::Drtp => drtp_update(model, &std, target)?,
    };
    Ok((updates, metrics))
}

/// One optimizer step on a batch. Both passes of a forward-only rule share
/// the dropout masks drawn here unless `independent_masks` is set; the
/// weights change once, after the modulated pass.
pub fn train_step(
    model: &mut Model,
    x: &Tensor,
    target: &Tensor,
    config: &TrainConfig,
    lr: f64,
    state: &mut OptimizerState,
    dropout_rng: &mut Rng,
) -> Result<StepMetrics> {
    let masks = DropoutMasks::sample(model, x.shape()[0], dropout_rng);
    let (updates, metrics) = if config.independent_masks && config.rule.is_forward_only() {
        let second = DropoutMasks::sample(model, x.shape()[0], dropout_rng);
        compute_updates_with(model, x, target, config.rule, &masks, &second)?
    } else {
        compute_updates(model, x, target, config.rule, &masks)?
    };
    sgd_momentum_step(model, &updates, state, lr, config.momentum)?;
    Ok(metrics)
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

fn count_correct(output: &Tensor, target: &Tensor) -> usize {
    let c = output.shape()[1];
    output
        .data()
        .chunks(c)
        .zip(target.data().chunks(c))
        .filter(|(o, t)| argmax(o) == argmax(t))
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub accuracy: f64,
    pub loss: f64,
}

const EVAL_CHUNK: usize = 1000;

/// Accuracy and mean loss with dropout disabled.
pub fn evaluate(model: &Model, dataset: &LabeledDataset) -> Result<Evaluation> {
    if dataset.num_classes() != model.num_classes() {
        return Err(Error::shape("dataset classes", &[dataset.num_classes()], &[model.num_classes()]));
    }
    if dataset.input_size() != model.input_size() {
        return Err(Error::shape("dataset input", &[dataset.input_size()], &[model.input_size()]));
    }
    if dataset.is_empty() {
        return Err(Error::Parameter("cannot evaluate on an empty dataset".into()));
    }
    let masks = DropoutMasks::none(model);
    let out_act = model.layers().last().expect("non-empty model").activation();
    let indices: Vec<usize> = (0..dataset.len()).collect();
    let (mut correct, mut loss_sum) = (0usize, 0.0);
    for chunk in indices.chunks(EVAL_CHUNK) {
        let (x, t) = dataset.gather(chunk);
        let trace = forward_standard(model, &x, &masks, false)?;
        let c = model.num_classes();
        correct += trace
            .output()
            .data()
            .chunks(c)
            .zip(&dataset.labels()[chunk[0]..chunk[0] + chunk.len()])
            .filter(|(o, &label)| argmax(o) == label)
            .count();
        loss_sum += batch_loss(out_act, trace.output(), &t)? * chunk.len() as f64;
    }
    let n = dataset.len() as f64;
    Ok(Evaluation {
        accuracy: correct as f64 / n,
        loss: loss_sum / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Activation, LayerSpec, ModelConfig};

    #[test]
    fn argmax_ties_pick_lowest() {
        assert_eq!(argmax(&[0.2, 0.5, 0.5, 0.1]), 1);
        assert_eq!(argmax(&[1.0, 1.0]), 0);
    }

    #[test]
    fn config_validation() {
        let mut c = TrainConfig::new(Rule::Pepita, 0.1, 64, 1);
        assert!(c.validate().is_ok());
        c.decay = vec![Decay { epoch: 60, factor: 0.1 }, Decay { epoch: 60, factor: 0.1 }];
        assert!(c.validate().is_err());
        c.decay.clear();
        c.momentum = 1.0;
        assert!(c.validate().is_err());
        c.momentum = 0.9;
        c.learning_rate = f64::NAN;
        assert!(c.validate().is_err());
    }

    #[test]
    fn identity_copy_model_is_perfect() {
        let cfg = ModelConfig {
            input_shape: [1, 1, 4],
            num_classes: 4,
            layers: vec![LayerSpec::FullyConnected { units: 4, activation: Activation::Softmax, dropout: 0.0 }],
        };
        let m = Model::from_parts(&cfg, vec![Some(Tensor::eye(4))], Tensor::zeros(vec![4, 4]), vec![None]).unwrap();
        let labels = vec![0, 1, 2, 3, 2, 1];
        let inputs = crate::datasets::one_hot(&labels, 4).reshape(vec![6, 1, 1, 4]).unwrap();
        let ds = LabeledDataset::new("identity", inputs, labels, 4).unwrap();
        assert_eq!(evaluate(&m, &ds).unwrap().accuracy, 1.0);
    }

    #[test]
    fn pepita_step_with_zero_error_is_fixpoint() {
        let cfg = ModelConfig {
            input_shape: [1, 1, 2],
            num_classes: 2,
            layers: vec![
                LayerSpec::FullyConnected { units: 2, activation: Activation::Identity, dropout: 0.0 },
                LayerSpec::FullyConnected { units: 2, activation: Activation::Identity, dropout: 0.0 },
            ],
        };
        let w = vec![Some(Tensor::eye(2)), Some(Tensor::eye(2))];
        let mut m = Model::from_parts(&cfg, w, Tensor::full(vec![2, 2], 0.1), vec![None, None]).unwrap();
        let before = m.clone();
        let x = Tensor::from_rows(&[[0.3, 0.7]]).unwrap();
        let mut c = TrainConfig::new(Rule::Pepita, 0.5, 1, 1);
        c.momentum = 0.0;
        let mut st = OptimizerState::new(&m);
        train_step(&mut m, &x, &x, &c, 0.5, &mut st, &mut Rng::new(0)).unwrap();
        assert_eq!(m, before);
    }

    #[test]
    fn pepita_step_matches_hand_instance() {
        let cfg = ModelConfig {
            input_shape: [1, 1, 2],
            num_classes: 2,
            layers: vec![
                LayerSpec::FullyConnected { units: 2, activation: Activation::Identity, dropout: 0.0 },
                LayerSpec::FullyConnected { units: 2, activation: Activation::Identity, dropout: 0.0 },
            ],
        };
        let w = vec![Some(Tensor::eye(2)), Some(Tensor::from_rows(&[[0.5, 0.0], [0.0, 0.5]]).unwrap())];
        let f = Tensor::from_rows(&[[0.1, 0.0], [0.0, 0.1]]).unwrap();
        let mut m = Model::from_parts(&cfg, w, f, vec![None, None]).unwrap();
        let x = Tensor::from_rows(&[[1.0, 0.0]]).unwrap();
        let mut c = TrainConfig::new(Rule::Pepita, 0.1, 1, 1);
        c.momentum = 0.0;
        let mut st = OptimizerState::new(&m);
        train_step(&mut m, &x, &x, &c, 0.1, &mut st, &mut Rng::new(0)).unwrap();
        // ΔW1 = [[0.0475,0],[0,0]], ΔW2 = [[−0.475,0],[0,0]]
        assert!((m.weight(0).unwrap().get2(0, 0) - (1.0 - 0.1 * 0.0475)).abs() < 1e-12);
        assert!((m.weight(1).unwrap().get2(0, 0) - (0.5 + 0.1 * 0.475)).abs() < 1e-12);
        assert_eq!(m.weight(1).unwrap().get2(1, 1), 0.5);
    }
}
