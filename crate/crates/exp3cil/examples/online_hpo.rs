//! The online method end to end: per-phase policy learning over the action
//! grid, with the learned policy carried across phases.
//!
//! Prints the action applied in each phase and a compact view of how the
//! policy's favorite actions evolve, including checkpoint files on disk.
//!
//! ```bash
//! cargo run --release --example online_hpo
//! ```

use exp3cil::datastream::{make_schedule, synth_generate, Setting};
use exp3cil::hyperspace::{ActionSpace, GridSpec};
use exp3cil::learner::Arch;
use exp3cil::orchestrator::{run_experiment, ActionSelection, RunConfig};

fn main() -> exp3cil::Result<()> {
    let setting = Setting::Tfh;
    let schedule = make_schedule(20, 5, setting)?;
    let arch = Arch::default();
    let (train, test) = synth_generate(&schedule, 10, 10, arch.input_dim, 5.5, 3)?;

    let cfg = RunConfig {
        batch_size: 4,
        xi: 0.05,
        ..RunConfig::default()
    };
    let space = ActionSpace::from_grid(GridSpec::default())?;
    let selection = ActionSelection::online(space)?;

    let out = tempfile::tempdir().expect("tempdir");
    let outcome = run_experiment(
        &schedule,
        &train,
        &test,
        arch,
        &selection,
        &cfg,
        5,
        Some(out.path()),
    )?;

    println!("{setting} online run, {} policy iterations per phase\n", cfg.policy_iters);
    for result in &outcome.phases {
        println!(
            "phase {}: applied {} -> accuracy {:.4}",
            result.phase, result.action, result.accuracy
        );
        if let Some(policy) = &result.policy {
            let dist = policy.distribution();
            let mut ranked: Vec<(usize, f64)> =
                dist.iter().copied().enumerate().collect();
            ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
            let top: Vec<String> = ranked
                .iter()
                .take(3)
                .map(|(i, p)| {
                    format!("{} @ {:.2}", selection.space.action_at(*i).unwrap(), p)
                })
                .collect();
            println!("         policy top-3: {}", top.join("; "));
        }
    }
    println!("\naverage accuracy {:.4}", outcome.average_accuracy);
    println!(
        "checkpoints written under {} (phase_<i>/model.json, policy.json, result.json)",
        out.path().display()
    );

    // The per-iteration trace behind the last phase, first few rows.
    if let Some(last) = outcome.phases.last() {
        println!("\nlast phase's first policy-learning iterations:");
        for record in last.trace.iter().take(5) {
            println!(
                "  iter {:>2}: sampled {} (p {:.3}) -> reward {:.3}",
                record.iteration, record.action, record.probability, record.reward
            );
        }
    }
    Ok(())
}
