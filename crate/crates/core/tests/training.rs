use std::path::Path;

use pepita::datasets::{LabeledDataset, SyntheticSpec};
use pepita::network::{Activation, ModelConfig};
use pepita::rules::Rule;
use pepita::trainer::{evaluate, files, run_experiment, Checkpoint, DiagnosticsConfig, Experiment, TrainConfig};
use pepita::Error;

fn data() -> (LabeledDataset, LabeledDataset) {
    let spec = SyntheticSpec { shape: [1, 6, 6], num_classes: 4, noise: 0.3, seed: 11 };
    (spec.generate("syn-train", 400, 0).unwrap(), spec.generate("syn-test", 200, 1).unwrap())
}

fn experiment(rule: Rule, lr: f64, epochs: usize) -> Experiment {
    let mut train = TrainConfig::new(rule, lr, 20, epochs);
    train.seed = 3;
    train.exact_repro = true;
    Experiment {
        name: format!("{rule:?}"),
        model: ModelConfig::fully_connected([1, 6, 6], &[32], 4, 0.0),
        train,
        diagnostics: DiagnosticsConfig::default(),
        context: serde_json::Value::Null,
    }
}

fn run(exp: &Experiment, dir: &Path) -> pepita::Result<pepita::trainer::ExperimentSummary> {
    let (tr, te) = data();
    run_experiment(exp, &tr, &te, dir)
}

#[test]
fn every_rule_learns_separable_data() {
    for (rule, lr) in [(Rule::Pepita, 0.01), (Rule::PepitaVariant, 0.01), (Rule::Bp, 0.05), (Rule::Fa, 0.05), (Rule::Drtp, 0.01)] {
        let dir = tempfile::tempdir().unwrap();
        let mut exp = experiment(rule, lr, 8);
        if rule == Rule::Drtp {
            exp.model = ModelConfig::fully_connected_with([1, 6, 6], &[32], 4, 0.0, Activation::Tanh, Activation::Sigmoid);
        }
        let s = run(&exp, dir.path()).unwrap();
        let first = s.records[0].test_accuracy;
        assert!(s.final_test_accuracy > 0.8, "{rule:?}: {first} -> {}", s.final_test_accuracy);
        assert_eq!(s.records.len(), 9);
    }
}

#[test]
fn identical_seeds_give_identical_outputs() {
    let exp = experiment(Rule::Pepita, 0.01, 3);
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run(&exp, a.path()).unwrap();
    run(&exp, b.path()).unwrap();
    for f in [files::METRICS, files::CHECKPOINT, files::HISTOGRAMS] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn checkpoint_reload_evaluates_identically() {
    let dir = tempfile::tempdir().unwrap();
    let s = run(&experiment(Rule::Fa, 0.05, 2), dir.path()).unwrap();
    let ck = Checkpoint::load(dir.path().join(files::CHECKPOINT)).unwrap();
    let (tr, te) = data();
    assert_eq!(evaluate(&ck.model, &te).unwrap().accuracy, s.final_test_accuracy);
    assert_eq!(evaluate(&ck.model, &tr).unwrap().accuracy, s.final_train_accuracy);
    assert!(ck.optimizer.is_some());
    assert!(ck.model.feedback(0).is_some() || ck.model.feedback(1).is_some());
}

#[test]
fn divergence_reports_where_it_happened() {
    let dir = tempfile::tempdir().unwrap();
    let mut exp = experiment(Rule::Bp, 1e4, 30);
    exp.model = ModelConfig::fully_connected_with([1, 6, 6], &[32], 4, 0.0, Activation::Tanh, Activation::Identity);
    let err = run(&exp, dir.path()).unwrap_err();
    match &err {
        Error::Divergence { site, .. } => assert!(site.epoch.is_some() && site.step.is_some(), "{err}"),
        other => panic!("expected divergence, got {other}"),
    }
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join(files::SUMMARY)).unwrap()).unwrap();
    assert_eq!(summary["status"], "diverged");
    assert!(!dir.path().join(files::CHECKPOINT).exists());
}

#[test]
fn independent_masks_only_matter_with_dropout() {
    let finals = |dropout: f64, independent: bool| {
        let dir = tempfile::tempdir().unwrap();
        let mut exp = experiment(Rule::Pepita, 0.01, 2);
        exp.model = ModelConfig::fully_connected([1, 6, 6], &[32], 4, dropout);
        exp.train.independent_masks = independent;
        run(&exp, dir.path()).unwrap();
        std::fs::read(dir.path().join(files::CHECKPOINT)).unwrap()
    };
    assert_eq!(finals(0.0, false), finals(0.0, true));
    assert_ne!(finals(0.3, false), finals(0.3, true));
}
