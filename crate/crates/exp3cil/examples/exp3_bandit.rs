//! The Exp3 policy on a toy stationary bandit.
//!
//! Five arms pay Bernoulli rewards; arm 0's mean is 0.2 above the rest. The
//! policy starts uniform and shifts probability mass toward the paying arm
//! through importance-weighted exponential updates.
//!
//! ```bash
//! cargo run --release --example exp3_bandit
//! ```

use exp3cil::bandit::PolicyState;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> exp3cil::Result<()> {
    let means = [0.2, 0.0, 0.0, 0.0, 0.0];
    let mut policy = PolicyState::new(means.len(), 0.05)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    println!("update   p(arm 0)   distribution");
    for t in 0..=1000 {
        if t % 100 == 0 {
            let d = policy.distribution();
            let row: Vec<String> = d.iter().map(|p| format!("{p:.3}")).collect();
            println!("{t:>6}   {:>8.4}   [{}]", d[0], row.join(", "));
        }
        let arm = policy.sample(&mut rng);
        let reward = if rng.random::<f64>() < means[arm] { 1.0 } else { 0.0 };
        policy.update(arm, reward)?;
    }

    // The state checkpoints as plain JSON.
    let snapshot = policy.to_json()?;
    let restored = PolicyState::from_json(&snapshot)?;
    println!(
        "\ncheckpoint round-trip ok: {} updates, {} weights",
        restored.update_count(),
        restored.len()
    );
    Ok(())
}
