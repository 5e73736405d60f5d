//! Model construction and the standard / modulated forward passes.

mod activation;
mod config;
mod embed;
mod forward;
mod model;

pub use activation::{relu, sigmoid, softmax, tanh, Activation};
pub use config::{LayerSpec, ModelConfig};
pub use embed::export_embeddings;
pub use forward::{forward_modulated, forward_standard, modulated_input, ActivationTrace, DropoutMasks, LayerTrace};
pub use model::{FeedbackKind, InitSpec, Model};
