//! Saves a trained model with its optimizer state, reloads it and checks
//! that the evaluation is unchanged.
//!
//! cargo run --release --example checkpoint_roundtrip

use pepita::datasets::{batch_iter, BatchPlan, SyntheticSpec};
use pepita::network::{Model, ModelConfig};
use pepita::numerics::Rng;
use pepita::rules::Rule;
use pepita::trainer::{evaluate, train_step, Checkpoint, OptimizerState, TrainConfig};

fn main() -> pepita::Result<()> {
    let spec = SyntheticSpec { shape: [1, 6, 6], num_classes: 4, noise: 0.3, seed: 9 };
    let (train, test) = (spec.generate("train", 400, 0)?, spec.generate("test", 100, 1)?);
    let cfg = TrainConfig::new(Rule::Fa, 0.05, 20, 1);
    let mut model = Model::build(&ModelConfig::fully_connected([1, 6, 6], &[32], 4, 0.0), &cfg.init_spec(), 3)?;
    let mut opt = OptimizerState::new(&model);
    let mut rng = Rng::new(0);
    for b in batch_iter(&train, &BatchPlan { batch_size: 20, seed: 0, drop_last: false }, 0)? {
        train_step(&mut model, &b.inputs, &b.targets, &cfg, cfg.learning_rate, &mut opt, &mut rng)?;
    }

    let path = std::env::temp_dir().join(format!("pepita-ck-{}.bin", std::process::id()));
    Checkpoint::new(model.clone(), Some(opt), serde_json::json!({ "note": "example" })).save(&path)?;
    let back = Checkpoint::load(&path)?;
    let (a, b) = (evaluate(&model, &test)?, evaluate(&back.model, &test)?);
    println!("before save: {:.4}  after load: {:.4}  identical: {}", a.accuracy, b.accuracy, a == b);
    println!("meta: {}", back.meta);
    std::fs::remove_file(&path).ok();
    Ok(())
}
