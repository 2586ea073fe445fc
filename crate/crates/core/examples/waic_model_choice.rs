// Model choice by WAIC on a network whose blocks have very different
// within-community densities.

use blockforge::evaluation::{fit_report, waic};
use blockforge::synthgen::{generate, ScenarioSpec};
use blockforge::{run_chain, ChainConfig, ClusteringPrior, ModelKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run(cfg: ChainConfig) -> blockforge::Result<()> {
    let spec = ScenarioSpec::scenario2(4);
    let syn = generate(&spec, &mut ChaCha8Rng::seed_from_u64(spec.seed))?;
    let g = &syn.network;
    let prior = ClusteringPrior::Pyp {
        alpha: 1.0,
        sigma: 0.25,
    };
    println!("{:<5} {:>10} {:>8} {:>4}", "model", "WAIC", "ARI", "H");
    for kind in [
        ModelKind::Cm,
        ModelKind::Cdm { q: 4 },
        ModelKind::Cbm { q: 4 },
    ] {
        let samples = run_chain(kind, g, prior, &cfg)?;
        let r = fit_report(&samples, g, Some(&syn.truth))?;
        debug_assert_eq!(r.waic, waic(&samples, g)?);
        println!(
            "{:<5} {:>10.1} {:>8.3} {:>4}",
            kind.name(),
            r.waic,
            r.ari.unwrap(),
            r.h_median
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> blockforge::Result<()> {
    run(ChainConfig {
        burn_in: 4000,
        n_samples: 500,
        thin: 5,
        seed: 4,
        ..ChainConfig::default()
    })
}
