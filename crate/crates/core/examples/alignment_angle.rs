//! Tracks the angle between the end-to-end forward map and the transposed
//! projection matrix while a network trains one step at a time.
//!
//! cargo run --release --example alignment_angle

use pepita::datasets::{batch_iter, BatchPlan, SyntheticSpec};
use pepita::diagnostics::{model_alignment_angle, weight_norm};
use pepita::network::{Model, ModelConfig};
use pepita::numerics::{Concern, Rng};
use pepita::rules::Rule;
use pepita::trainer::{OptimizerState, TrainConfig, train_step};

fn main() -> pepita::Result<()> {
    let spec = SyntheticSpec { shape: [1, 10, 10], num_classes: 10, noise: 0.3, seed: 5 };
    let train = spec.generate("train", 1500, 0)?;
    let cfg = TrainConfig::new(Rule::Pepita, 0.01, 50, 5);
    let mut model = Model::build(&ModelConfig::fully_connected([1, 10, 10], &[200], 10, 0.0), &cfg.init_spec(), 0)?;
    let mut opt = OptimizerState::new(&model);
    let plan = BatchPlan { batch_size: cfg.batch_size, seed: 0, drop_last: false };

    println!("epoch  angle(deg)  |W1|");
    println!("{:>5}  {:>10.2}  {:.3}", 0, model_alignment_angle(&model)?, weight_norm(model.weight(0).unwrap()));
    for epoch in 0..cfg.epochs {
        let mut rng = Rng::for_concern_indexed(0, Concern::Dropout, epoch as u64);
        for batch in batch_iter(&train, &plan, epoch)? {
            train_step(&mut model, &batch.inputs, &batch.targets, &cfg, cfg.lr_at_epoch(epoch), &mut opt, &mut rng)?;
        }
        println!("{:>5}  {:>10.2}  {:.3}", epoch + 1, model_alignment_angle(&model)?, weight_norm(model.weight(0).unwrap()));
    }
    Ok(())
}
