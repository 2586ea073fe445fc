// Fit every model/prior combination to one network and tabulate the
// reports, the same grid the `compare` command runs.

use blockforge::cli::{parse_grid, run_grid};
use blockforge::evaluation::FitReport;
use blockforge::synthgen::{generate, ScenarioSpec};
use blockforge::ChainConfig;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run(grid: &str, cfg: ChainConfig) -> blockforge::Result<()> {
    let spec = ScenarioSpec::scenario1(2);
    let syn = generate(&spec, &mut ChaCha8Rng::seed_from_u64(spec.seed))?;
    let cells = parse_grid(grid, 2)?;
    let rows = run_grid(&cells, &syn.network, Some(&syn.truth), &cfg, None)?;
    println!("run_id,{}", FitReport::CSV_HEADER);
    for (id, r) in &rows {
        println!("{id},{}", r.csv_row());
    }
    let best = rows
        .iter()
        .min_by(|a, b| a.1.waic.total_cmp(&b.1.waic))
        .expect("nonempty grid");
    println!("lowest WAIC: {} + {}", best.1.model, best.1.prior);
    Ok(())
}

#[allow(dead_code)]
fn main() -> blockforge::Result<()> {
    let cfg = ChainConfig {
        burn_in: 3000,
        n_samples: 500,
        thin: 5,
        seed: 2,
        ..ChainConfig::default()
    };
    run("full", cfg)
}
