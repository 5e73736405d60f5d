//! Trains the same architecture with every learning rule and prints a table.
//!
//! cargo run --release --example compare_rules

use pepita::datasets::SyntheticSpec;
use pepita::network::{Activation, ModelConfig};
use pepita::rules::Rule;
use pepita::trainer::{run_experiment, DiagnosticsConfig, Experiment, TrainConfig};

fn main() -> pepita::Result<()> {
    let spec = SyntheticSpec { shape: [1, 8, 8], num_classes: 10, noise: 0.4, seed: 2 };
    let train = spec.generate("train", 2000, 0)?;
    let test = spec.generate("test", 500, 1)?;
    let root = tempfile_root();

    println!("{:<14} {:>9} {:>9} {:>12}", "rule", "final", "best", "out w std");
    for (rule, lr) in [(Rule::Bp, 0.05), (Rule::Fa, 0.05), (Rule::Drtp, 0.01), (Rule::Pepita, 0.01), (Rule::PepitaVariant, 0.01)] {
        // DRTP needs bounded hidden units and a sigmoid readout.
        let model = if rule == Rule::Drtp {
            ModelConfig::fully_connected_with([1, 8, 8], &[256], 10, 0.0, Activation::Tanh, Activation::Sigmoid)
        } else {
            ModelConfig::fully_connected([1, 8, 8], &[256], 10, 0.0)
        };
        let exp = Experiment {
            name: format!("{rule:?}"),
            model,
            train: TrainConfig::new(rule, lr, 64, 8),
            diagnostics: DiagnosticsConfig { histograms: false, ..Default::default() },
            context: serde_json::Value::Null,
        };
        let s = run_experiment(&exp, &train, &test, &root.join(&exp.name))?;
        println!("{:<14} {:>9.3} {:>9.3} {:>12.4}", exp.name, s.final_test_accuracy, s.best_test_accuracy, s.output_weight_std);
    }
    Ok(())
}

fn tempfile_root() -> std::path::PathBuf {
    std::env::temp_dir().join(format!("pepita-compare-{}", std::process::id()))
}
