//! Brute-force reference implementations shared by the integration tests.
//! None of these call into the library's own numerics.

#![allow(dead_code)]

use std::collections::HashMap;

use blockforge::{Network, Partition, SymMatrix};
use rand::Rng;

/// Every set partition of `0..n` as a restricted growth string.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    fn rec(i: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for c in 0..=max + 1 {
            cur[i] = c;
            rec(i + 1, max.max(c), cur, out);
        }
    }
    if n == 0 {
        return out;
    }
    cur[0] = 0;
    rec(1, 0, &mut cur, &mut out);
    out
}

/// Normal CDF from the Taylor series `1/2 + phi(x) sum x^(2k+1) / (2k+1)!!`.
/// Accurate to ~1e-15 for `|x| <= 3`.
pub fn phi_series(x: f64) -> f64 {
    let mut term = x;
    let mut sum = x;
    let mut k = 0.0;
    while term.abs() > 1e-18 * sum.abs().max(1e-300) {
        k += 1.0;
        term *= x * x / (2.0 * k + 1.0);
        sum += term;
        if k > 500.0 {
            break;
        }
    }
    0.5 + (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt() * sum
}

/// `sum_{i<j} ln Bernoulli(y_ij; Phi(eta_{z_i z_j}))`, one pair at a time.
pub fn pairwise_loglik(g: &Network, z: &[usize], eta: &SymMatrix<f64>) -> f64 {
    let n = g.n();
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let p = phi_series(eta.get(z[i], z[j]));
            total += if g.has_edge(i, j) {
                p.ln()
            } else {
                (1.0 - p).ln()
            };
        }
    }
    total
}

pub fn random_network<R: Rng>(rng: &mut R, n: usize, p: f64) -> Network {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Network::from_edges(n, edges).unwrap()
}

pub fn random_labels<R: Rng>(rng: &mut R, n: usize, k: usize) -> Partition {
    let raw: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
    Partition::canonicalize(&raw).unwrap()
}

/// Ewens probability of an unordered partition.
pub fn ewens(sizes: &[usize], alpha: f64) -> f64 {
    let n: usize = sizes.iter().sum();
    let mut p = alpha.powi(sizes.len() as i32);
    for &s in sizes {
        p *= (1..s).map(|x| x as f64).product::<f64>();
    }
    for i in 0..n {
        p /= alpha + i as f64;
    }
    p
}

/// Pair-counting table `(a, b, c, d)`: together in both, only in `x`,
/// only in `y`, apart in both.
pub fn pair_counts(x: &[usize], y: &[usize]) -> (f64, f64, f64, f64) {
    let (mut a, mut b, mut c, mut d) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            match (x[i] == x[j], y[i] == y[j]) {
                (true, true) => a += 1.0,
                (true, false) => b += 1.0,
                (false, true) => c += 1.0,
                (false, false) => d += 1.0,
            }
        }
    }
    (a, b, c, d)
}

/// VI from the joint label distribution, in bits.
pub fn vi_oracle(x: &[usize], y: &[usize]) -> f64 {
    let n = x.len() as f64;
    let mut joint: HashMap<(usize, usize), f64> = HashMap::new();
    let mut px: HashMap<usize, f64> = HashMap::new();
    let mut py: HashMap<usize, f64> = HashMap::new();
    for (&a, &b) in x.iter().zip(y) {
        *joint.entry((a, b)).or_default() += 1.0 / n;
        *px.entry(a).or_default() += 1.0 / n;
        *py.entry(b).or_default() += 1.0 / n;
    }
    // H(X|Y) + H(Y|X)
    joint
        .iter()
        .map(|(&(a, b), &p)| -p * ((p / py[&b]).log2() + (p / px[&a]).log2()))
        .sum()
}

/// Hubert-Arabie ARI from pair counts; 1 when both partitions are the same
/// trivial partition.
pub fn ari_oracle(x: &[usize], y: &[usize]) -> f64 {
    let (a, b, c, d) = pair_counts(x, y);
    let den = (a + b) * (b + d) + (a + c) * (c + d);
    if den == 0.0 {
        return 1.0;
    }
    2.0 * (a * d - b * c) / den
}

/// `(FDR, FNR)` of `est` against `truth` by pair enumeration.
pub fn fdr_fnr_oracle(est: &[usize], truth: &[usize]) -> (f64, f64) {
    let (a, b, c, _) = pair_counts(est, truth);
    let fdr = if a + b > 0.0 { b / (a + b) } else { 0.0 };
    let fnr = if a + c > 0.0 { c / (a + c) } else { 0.0 };
    (fdr, fnr)
}

/// Standard error of a mean from batch means.
pub fn batch_se(xs: &[f64], batches: usize) -> f64 {
    let len = xs.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| xs[b * len..(b + 1) * len].iter().sum::<f64>() / len as f64)
        .collect();
    let m = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (batches as f64 - 1.0);
    (var / batches as f64).sqrt()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Marginal likelihood of every set partition of the nodes of `g` under
/// the class model, times its Ewens prior mass, normalized. The intercepts
/// are integrated out on a trapezoid grid over `(zeta, ln tau2, eta)` with
/// `zeta ~ N(0, 3)`, `tau2 ~ IG(3, 2)` and `eta_kl ~ N(zeta, tau2)`.
pub fn cm_dp_exact_posterior(g: &Network, alpha: f64) -> Vec<(Vec<usize>, f64)> {
    use std::f64::consts::PI;
    let n = g.n();
    assert!(n <= 4, "grid integration is for tiny networks");
    let parts = set_partitions(n);
    // (s, m) of every block with pairs, per partition
    let cells: Vec<Vec<(usize, usize)>> = parts
        .iter()
        .map(|z| {
            let k = z.iter().max().unwrap() + 1;
            let mut sm = vec![(0usize, 0usize); k * k];
            for i in 0..n {
                for j in i + 1..n {
                    let (a, b) = (z[i].min(z[j]), z[i].max(z[j]));
                    sm[a * k + b].1 += 1;
                    sm[a * k + b].0 += g.has_edge(i, j) as usize;
                }
            }
            sm.into_iter().filter(|c| c.1 > 0).collect()
        })
        .collect();
    let max_m = n * (n - 1) / 2;

    let h = 0.05;
    let grid = |lo: f64, hi: f64| -> Vec<f64> {
        let steps = ((hi - lo) / h).round() as usize;
        (0..=steps).map(|i| lo + i as f64 * h).collect()
    };
    let zetas = grid(-9.0, 9.0);
    let logv = grid(-7.0, 6.0);
    let ts = grid(-8.0, 8.0);
    let phi_t: Vec<f64> = ts
        .iter()
        .map(|t| (-0.5 * t * t).exp() / (2.0 * PI).sqrt() * h)
        .collect();

    let mut ml = vec![0.0; parts.len()];
    for &v in &logv {
        let tau2 = v.exp();
        let tau = tau2.sqrt();
        // IG(3, 2) density in ln tau2: b^a / Gamma(a) * exp(-a v - b e^{-v})
        let p_v = 8.0 / 2.0 * (-3.0 * v - 2.0 * (-v).exp()).exp() * h;
        if p_v < 1e-300 {
            continue;
        }
        for &zeta in &zetas {
            let p_z = (-zeta * zeta / 6.0).exp() / (6.0 * PI).sqrt() * h;
            // f[s][m] = E[Phi^s (1 - Phi)^(m - s)]
            let mut f = vec![vec![0.0; max_m + 1]; max_m + 1];
            for (t, w) in ts.iter().zip(&phi_t) {
                let q = phi_series_any(zeta + tau * t);
                for m in 1..=max_m {
                    for s in 0..=m {
                        f[s][m] += w * q.powi(s as i32) * (1.0 - q).powi((m - s) as i32);
                    }
                }
            }
            for (pi, cs) in cells.iter().enumerate() {
                let mut prod = p_v * p_z;
                for &(s, m) in cs {
                    prod *= f[s][m];
                }
                ml[pi] += prod;
            }
        }
    }
    let mut post: Vec<f64> = parts
        .iter()
        .zip(&ml)
        .map(|(z, &l)| {
            let k = z.iter().max().unwrap() + 1;
            let sizes: Vec<usize> = (0..k)
                .map(|c| z.iter().filter(|&&x| x == c).count())
                .collect();
            ewens(&sizes, alpha) * l
        })
        .collect();
    let total: f64 = post.iter().sum();
    post.iter_mut().for_each(|p| *p /= total);
    parts.into_iter().zip(post).collect()
}

/// Normal CDF for any argument: the series in the bulk, the upper-tail
/// continued fraction beyond |x| = 3.
pub fn phi_series_any(x: f64) -> f64 {
    if x.abs() <= 3.0 {
        return phi_series(x);
    }
    let t = x.abs();
    let mut frac = t;
    for k in (1..=60).rev() {
        frac = t + k as f64 / frac;
    }
    let tail = (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt() / frac;
    if x > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Statistics recorded per Geweke cycle.
pub const GEWEKE_STATS: [&str; 5] = ["global", "global^2", "tau2", "sigma2", "K*"];

/// Successive-conditional simulator: sweep, then redraw the network from the
/// likelihood at the current state. Returns one row of [`GEWEKE_STATS`] per
/// cycle after `burn` warm-up cycles (sigma2 is NaN for the class model).
pub fn geweke_successive(
    kind: blockforge::ModelKind,
    prior: blockforge::ClusteringPrior,
    cfg: blockforge::ChainConfig,
    n: usize,
    burn: usize,
    cycles: usize,
    seed: u64,
) -> Vec<[f64; 5]> {
    use blockforge::blockmodels::eta_matrix;
    use blockforge::{Chain, ModelState};
    use rand::SeedableRng;
    let mut yr = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let mut g = random_network(&mut yr, n, 0.5);
    let mut chain = Chain::new(
        kind,
        prior,
        cfg,
        &g,
        2,
        rand_chacha::ChaCha8Rng::seed_from_u64(seed),
    )
    .unwrap();
    let redraw = |chain: &Chain, yr: &mut rand_chacha::ChaCha8Rng| {
        let eta = eta_matrix(&chain.kind(), chain.state()).unwrap();
        let z = chain.labels();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if yr.random::<f64>() < phi_series_any(eta.get(z[i], z[j])) {
                    edges.push((i, j));
                }
            }
        }
        Network::from_edges(n, edges).unwrap()
    };
    g = redraw(&chain, &mut yr);
    chain.resync(&g);
    let mut out = Vec::with_capacity(cycles);
    for c in 0..burn + cycles {
        chain.sweep(&g).unwrap();
        g = redraw(&chain, &mut yr);
        chain.resync(&g);
        if c >= burn {
            let row = match chain.state() {
                ModelState::Cm(s) => [
                    s.zeta,
                    s.zeta * s.zeta,
                    s.tau2,
                    f64::NAN,
                    chain.k_star() as f64,
                ],
                ModelState::Hybrid(s) => [
                    s.eta,
                    s.eta * s.eta,
                    s.tau2,
                    s.sigma2,
                    chain.k_star() as f64,
                ],
            };
            out.push(row);
        }
    }
    out
}

/// Prior mean and variance of `K*` by enumerating partitions of `n`.
pub fn prior_k_moments(prior: &blockforge::ClusteringPrior, n: usize) -> (f64, f64) {
    use blockforge::priors::log_partition_mass;
    let (mut m1, mut m2) = (0.0, 0.0);
    for x in set_partitions(n) {
        let z = Partition::canonicalize(&x).unwrap();
        let k = z.k();
        let mut w = log_partition_mass(prior, z.sizes(), n).unwrap().exp();
        if let blockforge::ClusteringPrior::Dm { k: kk, .. } = prior {
            if k > *kk {
                continue;
            }
            w *= (kk - k + 1..=*kk).product::<usize>() as f64;
        }
        m1 += w * k as f64;
        m2 += w * (k * k) as f64;
    }
    (m1, m2 - m1 * m1)
}
