//! The two distillation losses and the temperature rescaling behind them.
//!
//! Logit distillation is a cross-entropy between temperature-softened
//! prediction distributions; feature distillation is one minus the cosine
//! similarity of feature vectors. Both pull the current model toward the
//! previous phase's model, at strengths set by the per-phase action.
//!
//! ```bash
//! cargo run --example kd_losses
//! ```

use exp3cil::learner::{feature_kd_loss, logit_kd_loss, rescale_eta, softmax};

fn main() -> exp3cil::Result<()> {
    let old_logits = vec![3.0, 1.0, -1.0];
    println!("teacher logits {old_logits:?}");
    println!("softmax        {:?}", round3(&softmax(&old_logits)));
    println!("\ntemperature rescaling eta on the softmax output:");
    for tau in [1.0001, 2.0, 4.0, 16.0] {
        let eta = rescale_eta(&softmax(&old_logits), tau)?;
        println!("  tau {tau:>7.4} -> {:?}", round3(&eta));
    }

    println!("\nlogit KD loss against the teacher (tau = 2):");
    for (label, cur) in [
        ("identical logits ", vec![3.0, 1.0, -1.0]),
        ("mild drift       ", vec![2.5, 1.5, -0.5]),
        ("order swapped    ", vec![-1.0, 1.0, 3.0]),
    ] {
        println!(
            "  {label} loss {:.4}",
            logit_kd_loss(&cur, &old_logits, 2.0)?
        );
    }

    println!("\nfeature KD loss (1 - cosine):");
    for (label, cur, old) in [
        ("parallel     ", vec![2.0, 0.0], vec![1.0, 0.0]),
        ("orthogonal   ", vec![0.0, 1.0], vec![1.0, 0.0]),
        ("antiparallel ", vec![-1.0, 0.0], vec![1.0, 0.0]),
    ] {
        println!("  {label} loss {:.4}", feature_kd_loss(&cur, &old)?);
    }
    Ok(())
}

fn round3(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| (x * 1000.0).round() / 1000.0).collect()
}
