//! Compares backprop gradients with central finite differences of the loss.
//!
//! cargo run --release --example gradient_check

use pepita::datasets::one_hot;
use pepita::network::{forward_standard, Activation, DropoutMasks, InitSpec, Model, ModelConfig};
use pepita::numerics::{sample_normal, Rng};
use pepita::rules::{batch_loss, bp_update};

fn main() -> pepita::Result<()> {
    let cfg = ModelConfig::fully_connected_with([1, 3, 3], &[7, 5], 4, 0.0, Activation::Tanh, Activation::Softmax);
    let model = Model::build(&cfg, &InitSpec::default(), 12)?;
    let x = sample_normal(&mut Rng::new(1), 0.0, 1.0, &[5, 9])?;
    let t = one_hot(&[0, 1, 2, 3, 0], 4);
    let masks = DropoutMasks::none(&model);
    let loss = |m: &Model| -> pepita::Result<f64> { batch_loss(Activation::Softmax, forward_standard(m, &x, &masks, true)?.output(), &t) };

    let grads = bp_update(&model, &forward_standard(&model, &x, &masks, true)?, &t)?;
    let h = 1e-6;
    for l in model.trainable_layers() {
        let g = grads.delta(l).expect("trainable layer");
        let mut worst: f64 = 0.0;
        for i in 0..g.len() {
            let mut plus = model.clone();
            plus.weights_mut()[l].as_mut().unwrap().data_mut()[i] += h;
            let mut minus = model.clone();
            minus.weights_mut()[l].as_mut().unwrap().data_mut()[i] -= h;
            let fd = (loss(&plus)? - loss(&minus)?) / (2.0 * h);
            worst = worst.max((fd - g.data()[i]).abs() / fd.abs().max(1e-8));
        }
        println!("layer {l}: {} weights, max relative error {worst:.2e}", g.len());
    }
    Ok(())
}
