// What each clustering prior believes before seeing data: exact partition
// masses on a small set and the distribution of the number of clusters on
// a larger one.

use std::collections::BTreeMap;

use blockforge::priors::{log_partition_mass, prior_allocation, simulate_partition};
use blockforge::ClusteringPrior;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run(n: usize, draws: usize) -> blockforge::Result<()> {
    let priors = [
        ClusteringPrior::Dm { alpha: 1.0, k: 5 },
        ClusteringPrior::Dp { alpha: 1.0 },
        ClusteringPrior::Pyp {
            alpha: 1.0,
            sigma: 0.5,
        },
        ClusteringPrior::Gnp { gamma: 0.5 },
    ];

    println!("mass of a few partitions of 4 items (by block sizes)");
    for sizes in [vec![4], vec![2, 2], vec![3, 1], vec![1, 1, 1, 1]] {
        let row: Vec<String> = priors
            .iter()
            .map(|p| format!("{:.4}", log_partition_mass(p, &sizes, 4).unwrap().exp()))
            .collect();
        println!("  {sizes:?}: {}", row.join("  "));
    }

    println!("\nnext-item probabilities after seeing blocks of 5, 2 and 1");
    for p in &priors {
        let w = prior_allocation(p, &[5, 2, 1], 8, 3)?.normalized();
        println!(
            "  {:>4}: existing {:.3?}, new {:.3}",
            p.kind(),
            w.existing,
            w.new.unwrap_or(0.0)
        );
    }

    println!("\nnumber of clusters over {draws} draws with n = {n}");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for p in &priors {
        let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
        for _ in 0..draws {
            *hist
                .entry(simulate_partition(p, n, &mut rng)?.k())
                .or_default() += 1;
        }
        let mean = hist.iter().map(|(k, c)| (k * c) as f64).sum::<f64>() / draws as f64;
        let mode = hist
            .iter()
            .max_by_key(|(_, &c)| c)
            .map(|(&k, _)| k)
            .unwrap_or(0);
        let (lo, hi) = (hist.keys().next().unwrap(), hist.keys().last().unwrap());
        println!(
            "  {:>4}: mean {mean:.2}, mode {mode}, range {lo}..={hi}",
            p.kind()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> blockforge::Result<()> {
    run(100, 2000)
}
