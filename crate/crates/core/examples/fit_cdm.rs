// Fit the class-distance model with an elicited DP prior to a simulated
// network and report recovery of the planted communities.
//
// `cargo run --release --example fit_cdm` uses the default chain length.

use blockforge::evaluation::fit_report;
use blockforge::priors::elicit;
use blockforge::synthgen::{generate, ScenarioSpec};
use blockforge::{run_chain, ChainConfig, ModelKind, PriorKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run(cfg: ChainConfig) -> blockforge::Result<()> {
    let spec = ScenarioSpec::scenario1(1);
    let syn = generate(&spec, &mut ChaCha8Rng::seed_from_u64(spec.seed))?;
    let g = &syn.network;
    let prior = elicit(PriorKind::Dp, g.n(), g.mean_degree(), None)?;
    println!("prior {}", serde_json::to_string(&prior)?);

    let samples = run_chain(ModelKind::Cdm { q: 4 }, g, prior, &cfg)?;
    println!(
        "{} draws, final steps eta {:.3} / u {:.3}",
        samples.draws.len(),
        samples.final_step_eta,
        samples.final_step_u
    );
    let r = fit_report(&samples, g, Some(&syn.truth))?;
    println!(
        "posterior mean ARI {:.3}, point estimate ARI {:.3}",
        r.ari.unwrap(),
        r.point_ari.unwrap()
    );
    println!(
        "clusters: median {} (IQR {:?}), truth has {}",
        r.h_median,
        r.h_iqr,
        syn.truth.k()
    );
    println!(
        "VI to truth {:.3}, credible ball radius {:.3}",
        r.vi_to_truth.unwrap(),
        r.vi_ball_radius
    );
    println!("WAIC {:.1}, AUC {:.3}", r.waic, r.auc.unwrap_or(f64::NAN));
    println!("point estimate sizes {:?}", r.point_estimate.sizes());
    Ok(())
}

#[allow(dead_code)]
fn main() -> blockforge::Result<()> {
    run(ChainConfig {
        seed: 1,
        ..ChainConfig::default()
    })
}
