//! Forward-only training of feed-forward networks with the error-driven
//! input perturbation rule, alongside backpropagation, feedback alignment and
//! direct random target projection baselines.
//!
//! A step of the forward-only rule runs the network twice: once on `x`, and
//! once on `x + F·e` where `e` is the output error of the first pass and `F`
//! a fixed random projection. Each layer then learns from the difference of
//! its two activities.
//!
//! ```
//! use pepita::network::{forward_modulated, forward_standard, DropoutMasks, InitSpec, Model, ModelConfig};
//! use pepita::numerics::Tensor;
//! use pepita::rules::{error_vector, pepita_update_fc};
//!
//! let cfg = ModelConfig::fully_connected([1, 2, 2], &[8], 3, 0.0);
//! let model = Model::build(&cfg, &InitSpec::default(), 7).unwrap();
//! let x = Tensor::from_rows(&[[0.1, 0.9, 0.3, 0.0]]).unwrap();
//! let target = Tensor::from_rows(&[[0.0, 1.0, 0.0]]).unwrap();
//! let masks = DropoutMasks::none(&model);
//! let std = forward_standard(&model, &x, &masks, true).unwrap();
//! let e = error_vector(std.output(), &target).unwrap();
//! let modulated = forward_modulated(&model, &x, &e, &masks, true).unwrap();
//! let updates = pepita_update_fc(&model, &std, &modulated, &e).unwrap();
//! assert_eq!(updates.delta(0).unwrap().shape(), &[8, 4]);
//! ```

pub mod cli;
pub mod datasets;
pub mod diagnostics;
pub mod error;
pub mod lindyn;
pub mod network;
pub mod numerics;
pub mod rules;
pub mod trainer;

pub use error::{Error, Result};
