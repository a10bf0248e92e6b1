//! Building the discretized hyperparameter action space.
//!
//! Actions are (beta, gamma, lambda, delta) tuples laid out as a Cartesian
//! product in fixed lexicographic order, so an index in a serialized policy
//! always refers to the same action.
//!
//! ```bash
//! cargo run --example hyperparameter_grid
//! ```

use exp3cil::hyperspace::{ActionSpace, Classifier, GridSpec};

fn main() -> exp3cil::Result<()> {
    let space = ActionSpace::from_grid(GridSpec::default())?;
    println!("default grid: {} actions", space.len());
    println!("first five:");
    for i in 0..5 {
        println!("  [{i:>2}] {}", space.action_at(i)?);
    }
    println!("last: [{:>2}] {}", space.len() - 1, space.action_at(space.len() - 1)?);

    // index_of is the exact inverse of action_at.
    let probe = space.action_at(17)?;
    println!("\nindex_of(action_at(17)) = {}", space.index_of(&probe)?);

    // A custom grid: heavier feature-KD options, single learning rate.
    let custom = ActionSpace::from_grid(GridSpec {
        beta: vec![0.0, 1.0],
        gamma: vec![0.0, 2.0, 10.0],
        lambda: vec![0.02],
        delta: vec![Classifier::Fc, Classifier::Ncm],
    })?;
    println!("\ncustom grid: {} actions", custom.len());
    for (i, action) in custom.actions().iter().enumerate() {
        println!("  [{i:>2}] {action}");
    }
    Ok(())
}
