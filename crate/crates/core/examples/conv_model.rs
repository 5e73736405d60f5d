//! A single convolutional layer followed by max pooling and a dense
//! readout, trained with the forward-only rule.
//!
//! cargo run --release --example conv_model

use pepita::datasets::SyntheticSpec;
use pepita::network::{Activation, ModelConfig};
use pepita::rules::Rule;
use pepita::trainer::{run_experiment, DiagnosticsConfig, Experiment, TrainConfig};

fn main() -> pepita::Result<()> {
    let spec = SyntheticSpec { shape: [3, 12, 12], num_classes: 5, noise: 0.3, seed: 4 };
    let train = spec.generate("train", 1000, 0)?;
    let test = spec.generate("test", 250, 1)?;
    let model = ModelConfig::single_conv([3, 12, 12], 8, 3, 1, 5, Activation::Relu, Activation::Softmax);
    println!("layer shapes: {:?}", model.shapes()?);

    let mut cfg = TrainConfig::new(Rule::Pepita, 0.05, 50, 6);
    cfg.projection.reference_size = Some(3 * 12 * 12);
    let exp = Experiment {
        name: "conv".into(),
        model,
        train: cfg,
        diagnostics: DiagnosticsConfig::default(),
        context: serde_json::Value::Null,
    };
    let out = std::env::temp_dir().join(format!("pepita-conv-{}", std::process::id()));
    let s = run_experiment(&exp, &train, &test, &out)?;
    for r in &s.records {
        println!("epoch {:>2}: test accuracy {:.3}", r.epoch, r.test_accuracy);
    }
    Ok(())
}
