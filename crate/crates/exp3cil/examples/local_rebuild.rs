//! Rebuilding a local environment and scoring one action on it.
//!
//! Policy learning never touches the held-out test set. Instead each
//! iteration carves a class-balanced validation subset out of the phase's
//! training data (exemplars plus new classes), trains a throwaway copy of
//! the model briefly under the candidate action, and uses the local
//! validation accuracy as the reward.
//!
//! ```bash
//! cargo run --release --example local_rebuild
//! ```

use exp3cil::datastream::{make_schedule, split_local, synth_generate, Setting};
use exp3cil::hyperspace::{Action, Classifier};
use exp3cil::learner::{train_for_epochs, Arch, ModelState};
use exp3cil::orchestrator::{decoupled_reward, rollout, RewardLedger, RunConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> exp3cil::Result<()> {
    let schedule = make_schedule(6, 2, Setting::Tfs)?;
    let (train, _) = synth_generate(&schedule, 12, 4, 8, 5.0, 11)?;
    let arch = Arch {
        input_dim: 8,
        hidden_dim: 16,
        feature_dim: 6,
        ..Arch::default()
    };
    let cfg = RunConfig {
        m1_epochs: 2,
        batch_size: 4,
        ..RunConfig::default()
    };

    // Pre-train on phase 0 so there is a model to roll out from.
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let phase0 = Action::new(0.0, 0.0, 0.05, Classifier::Fc)?;
    let model = ModelState::random(arch, 3, &mut rng);
    let model = train_for_epochs(model, None, &phase0, 2.0, &train[0], 20, 4, &mut rng)?;

    // Phase 1 training data is new classes only here (no exemplars, for
    // brevity); carve the balanced validation subset out of it.
    let env = split_local(&train[1], 2, 99)?;
    println!(
        "phase-1 data: {} samples -> local train {}, local val {} ({} per class)",
        train[1].len(),
        env.train.len(),
        env.val.len(),
        2
    );
    println!("local val class counts: {:?}", env.val.class_counts());

    let ledger = RewardLedger::new();
    println!("\nper-action rollout rewards (lookahead 1, 2 epochs per step):");
    for action in [
        Action::new(0.0, 0.0, 0.05, Classifier::Fc)?,
        Action::new(1.0, 0.0, 0.05, Classifier::Ncm)?,
        Action::new(0.0, 5.0, 0.01, Classifier::Fc)?,
    ] {
        let mut roll_rng = ChaCha8Rng::seed_from_u64(7);
        let rewards = rollout(&model, &action, &env, &cfg, &mut roll_rng)?;
        let estimate = decoupled_reward(&rewards, &ledger)?;
        println!("  {action}: rewards {rewards:.3?} -> bandit reward {estimate:.3}");
    }
    Ok(())
}
