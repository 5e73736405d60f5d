//! Training orchestration: the input projection, SGD with momentum, the
//! learning-rate schedule, the epoch loop, evaluation and checkpoints.

mod checkpoint;
mod experiment;
mod optimizer;
mod projection;
mod step;

pub use checkpoint::{Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use experiment::{
    files, run_experiment, DiagnosticsConfig, EmbeddingConfig, Experiment, ExperimentSummary, MetricsRecord,
};
pub use optimizer::{lr_at_epoch, momentum_update, sgd_momentum_step, Decay, OptimizerState};
pub use projection::{make_f, ProjectionFamily, ProjectionSpec};
pub use step::{argmax, compute_updates, compute_updates_with, evaluate, train_step, Evaluation, StepMetrics, TrainConfig};
