//! A full class-incremental run with one fixed hyperparameter action, in
//! both data-receiving settings.
//!
//! Shows the raw phase loop: pre-train on phase 0, then per phase grow the
//! head, train on exemplars plus new data, evaluate on the cumulative
//! held-out set, and reselect exemplars by herding.
//!
//! ```bash
//! cargo run --release --example incremental_fixed_action
//! ```

use exp3cil::datastream::{make_schedule, synth_generate, Setting};
use exp3cil::hyperspace::{Action, Classifier};
use exp3cil::learner::Arch;
use exp3cil::orchestrator::{run_experiment, ActionSelection, RunConfig};

fn main() -> exp3cil::Result<()> {
    let action = Action::new(1.0, 0.0, 0.05, Classifier::Ncm)?;
    let cfg = RunConfig {
        batch_size: 4,
        ..RunConfig::default()
    };
    let arch = Arch::default();

    println!("fixed action {action}\n");
    for setting in [Setting::Tfh, Setting::Tfs] {
        let schedule = make_schedule(20, 5, setting)?;
        let (train, test) = synth_generate(&schedule, 10, 10, arch.input_dim, 5.5, 42)?;
        let selection = ActionSelection::fixed_action(action);
        let outcome =
            run_experiment(&schedule, &train, &test, arch, &selection, &cfg, 1, None)?;

        let sizes: Vec<usize> = schedule.classes_per_phase.iter().map(Vec::len).collect();
        println!("{setting}: classes per phase {sizes:?}");
        for result in &outcome.phases {
            println!(
                "  phase {}: accuracy {:.4} on {} classes seen",
                result.phase,
                result.accuracy,
                schedule.classes_through(result.phase)
            );
        }
        println!("  average accuracy {:.4}\n", outcome.average_accuracy);
    }
    Ok(())
}
