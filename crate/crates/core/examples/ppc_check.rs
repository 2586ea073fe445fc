// Posterior predictive check: simulate replicate networks from the fitted
// model and see whether the observed statistics look typical.

use blockforge::evaluation::ppc;
use blockforge::priors::elicit;
use blockforge::synthgen::{generate, ScenarioSpec};
use blockforge::{run_chain, ChainConfig, ModelKind, PriorKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run(cfg: ChainConfig) -> blockforge::Result<()> {
    let spec = ScenarioSpec::planted(80, 4, 5);
    let syn = generate(&spec, &mut ChaCha8Rng::seed_from_u64(5))?;
    let g = &syn.network;
    let prior = elicit(PriorKind::Gnp, g.n(), g.mean_degree(), None)?;
    for kind in [ModelKind::Cm, ModelKind::Cbm { q: 2 }] {
        let samples = run_chain(kind, g, prior, &cfg)?;
        let report = ppc(&samples, g, cfg.seed, 2)?;
        println!("{}", kind.name());
        for s in &report.stats {
            let fmt = |x: Option<f64>| x.map_or("NA".into(), |v| format!("{v:.4}"));
            let ci = s
                .ci95
                .map_or("NA".into(), |(a, b)| format!("[{a:.4}, {b:.4}]"));
            let flag = if s.covered95() { "" } else { "  <- outside" };
            println!(
                "  {:<14} observed {:>8}  95% {ci}{flag}",
                s.statistic,
                fmt(s.observed)
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> blockforge::Result<()> {
    run(ChainConfig {
        burn_in: 3000,
        n_samples: 500,
        thin: 4,
        seed: 5,
        ..ChainConfig::default()
    })
}
