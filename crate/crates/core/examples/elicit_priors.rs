// Choosing prior hyperparameters from the network itself, so that the
// prior expected number of clusters is about `n / mean degree`.

use blockforge::priors::{elicit, elicit_target, simulate_partition};
use blockforge::synthgen::{generate, ScenarioSpec};
use blockforge::PriorKind;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run(draws: usize) -> blockforge::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for spec in [ScenarioSpec::scenario1(3), ScenarioSpec::scenario2(3)] {
        let g = generate(&spec, &mut rng)?.network;
        let target = elicit_target(g.n(), g.mean_degree());
        println!(
            "n = {}, mean degree {:.2}: target K* = {target}",
            g.n(),
            g.mean_degree()
        );
        for kind in PriorKind::ALL {
            let prior = elicit(kind, g.n(), g.mean_degree(), None)?;
            let mean = (0..draws)
                .map(|_| simulate_partition(&prior, g.n(), &mut rng).map(|z| z.k() as f64))
                .sum::<blockforge::Result<f64>>()?
                / draws as f64;
            println!(
                "  {:<40} simulated E[K*] {mean:.2}",
                serde_json::to_string(&prior)?
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> blockforge::Result<()> {
    run(2000)
}
