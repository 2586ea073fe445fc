// Driving the sampler by hand: start from a chosen configuration, sweep,
// tune the step size yourself and watch the cluster count.

use blockforge::blockmodels::{CmState, ModelState};
use blockforge::sampler::adapt_step;
use blockforge::synthgen::{generate, ScenarioSpec};
use blockforge::{Chain, ChainConfig, ClusteringPrior, ModelKind, Partition, SymMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run(sweeps: usize) -> blockforge::Result<()> {
    let spec = ScenarioSpec::planted(60, 3, 8);
    let syn = generate(&spec, &mut ChaCha8Rng::seed_from_u64(8))?;
    let g = &syn.network;

    // everyone in one cluster, a flat intercept
    let z = Partition::single_cluster(g.n());
    let state = ModelState::Cm(CmState {
        eta_block: SymMatrix::filled(1, -1.0),
        zeta: 0.0,
        tau2: 1.0,
    });
    let mut chain = Chain::with_state(
        ModelKind::Cm,
        ClusteringPrior::Dp { alpha: 0.5 },
        ChainConfig::default(),
        g,
        &z,
        state,
        None,
        ChaCha8Rng::seed_from_u64(8),
    )?;

    for sweep in 1..=sweeps {
        chain.sweep(g)?;
        if sweep % 50 == 0 {
            let (acc, _) = chain.take_acceptance();
            chain.step_eta = adapt_step(chain.step_eta, acc.rate());
            let draw = chain.draw(sweep)?;
            println!(
                "sweep {sweep:>4}: K* = {}, loglik {:>9.2}, eta acceptance {:.2}, step {:.3}",
                draw.k_star,
                draw.loglik,
                acc.rate(),
                chain.step_eta
            );
        }
    }
    let est = chain.partition();
    println!(
        "final sizes {:?}, truth {:?}",
        est.sizes(),
        syn.truth.sizes()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> blockforge::Result<()> {
    run(500)
}
