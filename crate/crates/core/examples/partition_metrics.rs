// Comparing clusterings: VI, ARI, pairwise error rates, the VI point
// estimate of a set of sampled partitions and its credible ball.

use blockforge::partition::{ari, credible_ball_radius, fdr_fnr, point_estimate, vi_distance};
use blockforge::Partition;

pub fn run() -> blockforge::Result<()> {
    let truth = Partition::canonicalize(&[0, 0, 0, 1, 1, 1, 2, 2, 2])?;
    let merged = Partition::canonicalize(&[0, 0, 0, 1, 1, 1, 1, 1, 1])?;
    let split = Partition::canonicalize(&[0, 0, 3, 1, 1, 1, 2, 2, 2])?;
    let noisy = Partition::canonicalize(&[0, 1, 0, 1, 2, 1, 2, 0, 2])?;

    println!(
        "{:>8} {:>8} {:>8} {:>8} {:>8}",
        "", "VI", "ARI", "FDR", "FNR"
    );
    for (name, z) in [
        ("truth", &truth),
        ("merged", &merged),
        ("split", &split),
        ("noisy", &noisy),
    ] {
        let (fdr, fnr) = fdr_fnr(z, &truth)?;
        println!(
            "{name:>8} {:>8.4} {:>8.4} {fdr:>8.4} {fnr:>8.4}",
            vi_distance(z, &truth)?,
            ari(z, &truth)?
        );
    }

    // a pretend posterior: mostly the truth, sometimes merged or split
    let mut samples = vec![truth.clone(); 6];
    samples.extend([merged.clone(), merged, split.clone(), split]);
    let center = point_estimate(&samples)?;
    println!("\npoint estimate {:?}", center.one_based());
    for level in [0.5, 0.8, 0.95] {
        println!(
            "credible ball radius at {level}: {:.4}",
            credible_ball_radius(&samples, &center, level)?
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> blockforge::Result<()> {
    run()
}
