//! Learning rules: each turns forward traces into per-layer weight updates `ΔW_ℓ`.
//!
//! Updates follow the descent convention `W ← W − η·ΔW`; the learning rate
//! is applied by the optimizer, never here. Batched inputs produce the mean
//! of the per-sample updates.

mod backprop;
mod drtp;
mod grad;
mod loss;
mod pepita;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{ActivationTrace, FeedbackKind, Model};
use crate::numerics::Tensor;

pub use backprop::{bp_update, fa_update};
pub use drtp::drtp_update;
pub use grad::conv_filter_update;
pub use loss::{batch_loss, output_delta};
pub use pepita::{pepita_update, pepita_update_conv, pepita_update_fc, pepita_update_fc_variant, Presynaptic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Pepita,
    PepitaVariant,
    Bp,
    Fa,
    Drtp,
}

impl Rule {
    pub const ALL: [Rule; 5] = [Rule::Pepita, Rule::PepitaVariant, Rule::Bp, Rule::Fa, Rule::Drtp];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Pepita => "pepita",
            Rule::PepitaVariant => "pepita_variant",
            Rule::Bp => "bp",
            Rule::Fa => "fa",
            Rule::Drtp => "drtp",
        }
    }

    /// Feedback matrices the rule needs at build time.
    pub fn feedback_kind(self) -> FeedbackKind {
        match self {
            Rule::Fa => FeedbackKind::Alignment,
            Rule::Drtp => FeedbackKind::DirectTarget,
            _ => FeedbackKind::None,
        }
    }

    /// Whether a step needs the second (modulated) forward pass.
    pub fn is_forward_only(self) -> bool {
        matches!(self, Rule::Pepita | Rule::PepitaVariant)
    }
}

impl std::str::FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Rule> {
        Rule::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown rule '{s}'")))
    }
}

impl std::fmt::Display for Rule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-layer `ΔW_ℓ`, aligned with the model's layer list (`None` for
/// parameter-free layers).
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateSet {
    pub rule: Rule,
    pub deltas: Vec<Option<Tensor>>,
}

impl UpdateSet {
    pub fn delta(&self, l: usize) -> Option<&Tensor> {
        self.deltas.get(l).and_then(Option::as_ref)
    }

    /// Checks shapes against the model and that every entry is finite.
    pub fn validate(&self, model: &Model) -> Result<()> {
        if self.deltas.len() != model.num_layers() {
            return Err(Error::shape("update set", &[model.num_layers()], &[self.deltas.len()]));
        }
        for (l, (d, w)) in self.deltas.iter().zip(model.weights()).enumerate() {
            match (d, w) {
                (Some(d), Some(w)) if d.shape() == w.shape() => d.ensure_finite("update", Some(l + 1))?,
                (None, None) => {}
                (d, w) => {
                    return Err(Error::shape(
                        "update vs weight",
                        d.as_ref().map(Tensor::shape).unwrap_or(&[]),
                        w.as_ref().map(Tensor::shape).unwrap_or(&[]),
                    ))
                }
            }
        }
        Ok(())
    }

    pub fn is_all_zero(&self) -> bool {
        self.deltas.iter().flatten().all(|d| d.data().iter().all(|&v| v == 0.0))
    }
}

/// `e = h_L − target`, row per sample.
pub fn error_vector(output: &Tensor, target: &Tensor) -> Result<Tensor> {
    if output.shape() != target.shape() {
        return Err(Error::shape("error vector", output.shape(), target.shape()));
    }
    output.sub(target)
}

fn check_trace(model: &Model, trace: &ActivationTrace) -> Result<()> {
    if trace.layers.len() != model.num_layers() {
        return Err(Error::shape("trace layers", &[model.num_layers()], &[trace.layers.len()]));
    }
    let b = trace.batch_size();
    for l in 0..=model.num_layers() {
        let got = trace.activation(l).shape();
        if got != [b, model.size_at(l)] {
            return Err(Error::shape("trace activation", got, &[b, model.size_at(l)]));
        }
    }
    Ok(())
}

fn check_target(trace: &ActivationTrace, target: &Tensor) -> Result<()> {
    if trace.output().shape() != target.shape() {
        return Err(Error::shape("target", target.shape(), trace.output().shape()));
    }
    Ok(())
}
