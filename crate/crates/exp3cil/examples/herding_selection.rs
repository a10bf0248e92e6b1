//! Herding exemplar selection versus random subsets.
//!
//! Herding greedily picks samples whose running feature mean tracks the full
//! class mean. Across trials its exemplar mean sits much closer to the class
//! mean than a typical random subset of the same size.
//!
//! ```bash
//! cargo run --release --example herding_selection
//! ```

use exp3cil::learner::{herding_select, ModelState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> exp3cil::Result<()> {
    let dim = 16;
    let model = ModelState::identity(dim, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    let mut herd_dists = Vec::new();
    let mut random_dists = Vec::new();
    for _ in 0..200 {
        let xs: Vec<Vec<f64>> = (0..30)
            .map(|_| (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        let mut mean = vec![0.0; dim];
        for x in &xs {
            for (m, v) in mean.iter_mut().zip(x) {
                *m += v / xs.len() as f64;
            }
        }
        let dist_of = |idx: &[usize]| -> f64 {
            let mut sub = vec![0.0; dim];
            for &i in idx {
                for (s, v) in sub.iter_mut().zip(&xs[i]) {
                    *s += v / idx.len() as f64;
                }
            }
            mean.iter()
                .zip(&sub)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        };

        herd_dists.push(dist_of(&herding_select(&model, &xs, 5)?));
        let mut pool: Vec<usize> = (0..30).collect();
        for k in 0..5 {
            let j = rng.random_range(k..pool.len());
            pool.swap(k, j);
        }
        random_dists.push(dist_of(&pool[..5]));
    }

    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    println!("exemplar-mean distance to class mean over 200 trials (budget 5 of 30):");
    println!("  herding: mean {:.4}", mean(&herd_dists));
    println!("  random:  mean {:.4}", mean(&random_dists));
    let wins = herd_dists
        .iter()
        .zip(&random_dists)
        .filter(|(h, r)| h <= r)
        .count();
    println!("  herding at least as close in {wins}/200 trials");
    Ok(())
}
