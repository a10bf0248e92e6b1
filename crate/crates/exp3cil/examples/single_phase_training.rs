//! Train the classifier on one non-incremental phase of synthetic data and
//! report test accuracy across cluster separations.
//!
//! Useful for picking a separation where the task is learnable but not
//! saturated (the regime where hyperparameter choices matter).
//!
//! ```bash
//! cargo run --release --example single_phase_training
//! ```

use exp3cil::datastream::{make_schedule, synth_generate, Setting};
use exp3cil::hyperspace::{Action, Classifier};
use exp3cil::learner::{train_for_epochs, Arch, ModelState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> exp3cil::Result<()> {
    let classes = 20;
    let arch = Arch::default();
    let schedule = make_schedule(classes, 1, Setting::Tfs)?;
    let action = Action::new(0.0, 0.0, 0.05, Classifier::Fc)?;

    println!("separation  accuracy (mean over 3 seeds)");
    for separation in [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0] {
        let mut accs = Vec::new();
        for seed in 0..3u64 {
            let (train, test) = synth_generate(&schedule, 30, 10, arch.input_dim, separation, seed)?;
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let model = ModelState::random(arch, classes, &mut rng);
            let trained =
                train_for_epochs(model, None, &action, 2.0, &train[0], 20, 16, &mut rng)?;
            accs.push(trained.accuracy_on(&test[0], Classifier::Fc, None)?);
        }
        let mean = accs.iter().sum::<f64>() / accs.len() as f64;
        println!("{separation:>10.1}  {mean:.4}");
    }
    Ok(())
}
