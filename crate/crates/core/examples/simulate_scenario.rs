// Generate a planted-partition benchmark and look at it.
//
// `cargo run --example simulate_scenario -- [scenario] [seed] [out_dir]`

use blockforge::graph::network_stats;
use blockforge::synthgen::{blocks_csv, generate, ScenarioSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run(scenario: u32, seed: u64, out: Option<&str>) -> blockforge::Result<()> {
    let spec = ScenarioSpec::preset(scenario, seed)?;
    let syn = generate(&spec, &mut ChaCha8Rng::seed_from_u64(seed))?;
    let s = network_stats(&syn.network);
    println!(
        "scenario {scenario}, seed {seed}: n = {}, edges = {}",
        syn.network.n(),
        syn.network.n_edges()
    );
    println!("community sizes {:?}", syn.truth.sizes());
    println!(
        "density {:.4}, mean degree {:.2}, transitivity {:.3}",
        s.density, s.mean_degree, s.transitivity
    );
    println!("block edge probabilities:\n{}", blocks_csv(&syn.blocks));
    if let Some(dir) = out {
        for p in syn.write_to(dir)? {
            println!("wrote {}", p.display());
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> blockforge::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let scenario = args
        .first()
        .map_or(1, |s| s.parse().expect("scenario is 1 or 2"));
    let seed = args
        .get(1)
        .map_or(1, |s| s.parse().expect("seed is an integer"));
    run(scenario, seed, args.get(2).map(String::as_str))
}
