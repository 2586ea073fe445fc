//! Posterior summaries and model assessment: point estimate and credible
//! ball, cluster-count summary, in-sample predictive metrics, WAIC and
//! posterior predictive checks on network statistics.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blockmodels::{log_one_minus_probit, log_probit, probit, SymMatrix};
use crate::error::{Error, Result};
use crate::graph::{network_stats, Network, STAT_NAMES};
use crate::partition::{
    ari, credible_ball_radius, fdr_fnr, point_estimate, vi_distance, Partition,
};
use crate::sampler::{Draw, PosteriorSamples};

/// Probabilities are clamped to `[CLAMP, 1 - CLAMP]` before taking logs.
pub const CLAMP: f64 = 1e-12;
/// Credible level of the VI ball.
pub const BALL_LEVEL: f64 = 0.95;

fn nonempty(samples: &PosteriorSamples) -> Result<()> {
    if samples.draws.is_empty() {
        Err(Error::Empty("posterior samples hold no draws"))
    } else {
        Ok(())
    }
}

fn block_probs(d: &Draw) -> SymMatrix<f64> {
    let e = &d.eta_block;
    SymMatrix::from_fn(e.dim(), |a, b| probit(e.get(a, b)))
}

/// Posterior mean edge probabilities, row-major `n x n`, zero diagonal.
pub fn posterior_edge_probs(samples: &PosteriorSamples) -> Result<Vec<f64>> {
    nonempty(samples)?;
    let n = samples.n;
    let mut p = vec![0.0; n * n];
    for d in &samples.draws {
        let probs = block_probs(d);
        let z = d.labels.labels();
        for i in 0..n {
            for j in i + 1..n {
                p[i * n + j] += probs.get(z[i], z[j]);
            }
        }
    }
    let s = samples.draws.len() as f64;
    for i in 0..n {
        for j in i + 1..n {
            let v = p[i * n + j] / s;
            p[i * n + j] = v;
            p[j * n + i] = v;
        }
    }
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictiveMetrics {
    /// `None` when the network has no edges or no non-edges.
    pub auc: Option<f64>,
    pub mse: f64,
    pub logloss: f64,
}

/// In-sample AUC, MSE and log-loss of `p` over the unordered pairs of `g`.
pub fn predictive_metrics(p: &[f64], g: &Network) -> Result<PredictiveMetrics> {
    let n = g.n();
    if p.len() != n * n {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: n * n,
        });
    }
    let mut scored = Vec::with_capacity(g.n_pairs());
    let (mut se, mut ll) = (0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let y = g.has_edge(i, j);
            let q = p[i * n + j].clamp(CLAMP, 1.0 - CLAMP);
            let yf = if y { 1.0 } else { 0.0 };
            se += (yf - q) * (yf - q);
            ll -= if y { q.ln() } else { (1.0 - q).ln() };
            scored.push((q, y));
        }
    }
    let m = scored.len() as f64;
    Ok(PredictiveMetrics {
        auc: auc(&mut scored),
        mse: se / m,
        logloss: ll / m,
    })
}

/// Mann-Whitney AUC with mid-ranks for ties.
fn auc(scored: &mut [(f64, bool)]) -> Option<f64> {
    let pos = scored.iter().filter(|s| s.1).count();
    let neg = scored.len() - pos;
    if pos == 0 || neg == 0 {
        return None;
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < scored.len() {
        let mut end = start;
        while end < scored.len() && scored[end].0 == scored[start].0 {
            end += 1;
        }
        // ranks start..end (1-based start+1..=end) share their mean
        let mid = (start + end + 1) as f64 / 2.0;
        rank_sum += mid * scored[start..end].iter().filter(|s| s.1).count() as f64;
        start = end;
    }
    let (pos, neg) = (pos as f64, neg as f64);
    Some((rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg))
}

/// WAIC on the deviance scale with node pairs as units:
/// `-2 * sum_pairs [ln mean_s p(y_ij | draw s) - var_s ln p(y_ij | draw s)]`.
/// The variance uses the `S - 1` denominator.
pub fn waic(samples: &PosteriorSamples, g: &Network) -> Result<f64> {
    if samples.draws.len() < 2 {
        return Err(Error::Empty("WAIC needs at least two draws"));
    }
    if samples.n != g.n() {
        return Err(Error::LengthMismatch {
            left: samples.n,
            right: g.n(),
        });
    }
    let n = g.n();
    let units = g.n_pairs();
    // log-sum-exp (running max and scaled sum) and Welford accumulators
    let mut lse_max = vec![f64::NEG_INFINITY; units];
    let mut lse_sum = vec![0.0; units];
    let mut mean = vec![0.0; units];
    let mut m2 = vec![0.0; units];
    for (s, d) in samples.draws.iter().enumerate() {
        let terms = d.cell_log_terms();
        let z = d.labels.labels();
        let mut u = 0;
        for i in 0..n {
            for j in i + 1..n {
                let (lp, lq) = terms.get(z[i], z[j]);
                let l = if g.has_edge(i, j) { lp } else { lq };
                if l > lse_max[u] {
                    lse_sum[u] = lse_sum[u] * (lse_max[u] - l).exp() + 1.0;
                    lse_max[u] = l;
                } else {
                    lse_sum[u] += (l - lse_max[u]).exp();
                }
                let delta = l - mean[u];
                mean[u] += delta / (s + 1) as f64;
                m2[u] += delta * (l - mean[u]);
                u += 1;
            }
        }
    }
    let s = samples.draws.len() as f64;
    let mut total = 0.0;
    for u in 0..units {
        let lppd = lse_max[u] + lse_sum[u].ln() - s.ln();
        total += lppd - m2[u] / (s - 1.0);
    }
    Ok(-2.0 * total)
}

/// Median and interquartile range of the occupied-cluster counts, using
/// the lower nearest-rank quantile.
pub fn cluster_count_summary(k_stars: &[usize]) -> Result<(usize, (usize, usize))> {
    if k_stars.is_empty() {
        return Err(Error::Empty("no cluster counts"));
    }
    let mut s = k_stars.to_vec();
    s.sort_unstable();
    let rank = |p: f64| {
        let r = (p * s.len() as f64 - 1e-9).ceil().max(1.0) as usize;
        s[r.min(s.len()) - 1]
    };
    Ok((rank(0.5), (rank(0.25), rank(0.75))))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: String,
    pub prior: String,
    /// Posterior mean VI to the true partition.
    pub vi_to_truth: Option<f64>,
    /// VI radius of the 95% credible ball around the point estimate.
    pub vi_ball_radius: f64,
    #[serde(rename = "H_median")]
    pub h_median: usize,
    #[serde(rename = "H_iqr")]
    pub h_iqr: (usize, usize),
    /// Posterior mean ARI to the true partition.
    pub ari: Option<f64>,
    pub fdr: Option<f64>,
    pub fnr: Option<f64>,
    pub waic: f64,
    pub auc: Option<f64>,
    pub mse: f64,
    pub logloss: f64,
    /// Min-mean-VI partition among the draws, 1-based labels.
    pub point_estimate: Partition,
    /// ARI of the point estimate to the truth.
    pub point_ari: Option<f64>,
}

impl FitReport {
    pub const CSV_HEADER: &'static str = "model,prior,vi_to_truth,vi_ball_radius,H_median,H_q25,H_q75,ari,fdr,fnr,waic,auc,mse,logloss";

    pub fn csv_row(&self) -> String {
        let opt = |x: Option<f64>| x.map_or_else(|| "NA".to_string(), |v| format!("{v:.6}"));
        format!(
            "{},{},{},{:.6},{},{},{},{},{},{},{:.4},{},{:.6},{:.6}",
            self.model,
            self.prior,
            opt(self.vi_to_truth),
            self.vi_ball_radius,
            self.h_median,
            self.h_iqr.0,
            self.h_iqr.1,
            opt(self.ari),
            opt(self.fdr),
            opt(self.fnr),
            self.waic,
            opt(self.auc),
            self.mse,
            self.logloss
        )
    }
}

/// Full evaluation of a fit. Truth-based columns are filled iff `truth`
/// is given.
pub fn fit_report(
    samples: &PosteriorSamples,
    g: &Network,
    truth: Option<&Partition>,
) -> Result<FitReport> {
    nonempty(samples)?;
    let parts = samples.partitions();
    let est = point_estimate(&parts)?;
    let radius = credible_ball_radius(&parts, &est, BALL_LEVEL)?;
    let (h_median, h_iqr) = cluster_count_summary(&samples.k_stars())?;
    let p = posterior_edge_probs(samples)?;
    let pm = predictive_metrics(&p, g)?;
    let w = waic(samples, g)?;

    let (mut vi_t, mut ari_t, mut fdr_t, mut fnr_t, mut point_ari) = (None, None, None, None, None);
    if let Some(t) = truth {
        let per_draw = parts
            .par_iter()
            .map(|z| {
                let (fdr, fnr) = fdr_fnr(z, t)?;
                Ok([vi_distance(z, t)?, ari(z, t)?, fdr, fnr])
            })
            .collect::<Result<Vec<[f64; 4]>>>()?;
        let s = per_draw.len() as f64;
        let mean = |c: usize| per_draw.iter().map(|r| r[c]).sum::<f64>() / s;
        vi_t = Some(mean(0));
        ari_t = Some(mean(1));
        fdr_t = Some(mean(2));
        fnr_t = Some(mean(3));
        point_ari = Some(ari(&est, t)?);
    }
    Ok(FitReport {
        model: samples.model.name().to_string(),
        prior: samples.prior.kind().as_str().to_string(),
        vi_to_truth: vi_t,
        vi_ball_radius: radius,
        h_median,
        h_iqr,
        ari: ari_t,
        fdr: fdr_t,
        fnr: fnr_t,
        waic: w,
        auc: pm.auc,
        mse: pm.mse,
        logloss: pm.logloss,
        point_estimate: est,
        point_ari,
    })
}

/// Observed value and posterior predictive summary of one statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpcStat {
    pub statistic: String,
    pub observed: Option<f64>,
    pub median: Option<f64>,
    pub ci95: Option<(f64, f64)>,
    pub ci99: Option<(f64, f64)>,
    pub n_used: usize,
    /// Replicates on which the statistic was undefined.
    pub n_dropped: usize,
}

impl PpcStat {
    pub fn covered95(&self) -> bool {
        matches!((self.observed, self.ci95), (Some(o), Some((lo, hi))) if lo <= o && o <= hi)
    }

    pub fn covered99(&self) -> bool {
        matches!((self.observed, self.ci99), (Some(o), Some((lo, hi))) if lo <= o && o <= hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpcReport {
    pub stats: Vec<PpcStat>,
    /// Per replicate, statistics in [`STAT_NAMES`] order.
    #[serde(skip)]
    pub replicates: Vec<[Option<f64>; 6]>,
}

impl PpcReport {
    pub fn stat(&self, name: &str) -> Option<&PpcStat> {
        self.stats.iter().find(|s| s.statistic == name)
    }

    pub const CSV_HEADER: &'static str =
        "statistic,observed,median,lo95,hi95,lo99,hi99,n_used,n_dropped";

    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map_or_else(|| "NA".to_string(), |v| v.to_string());
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for s in &self.stats {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                s.statistic,
                opt(s.observed),
                opt(s.median),
                opt(s.ci95.map(|c| c.0)),
                opt(s.ci95.map(|c| c.1)),
                opt(s.ci99.map(|c| c.0)),
                opt(s.ci99.map(|c| c.1)),
                s.n_used,
                s.n_dropped
            );
        }
        out
    }

    /// `statistic,replicate,value` rows; undefined values are skipped.
    pub fn to_long_csv(&self) -> String {
        let mut out = String::from("statistic,replicate,value\n");
        for (k, name) in STAT_NAMES.iter().enumerate() {
            for (r, vals) in self.replicates.iter().enumerate() {
                if let Some(v) = vals[k] {
                    let _ = writeln!(out, "{name},{r},{v}");
                }
            }
        }
        out
    }
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Bernoulli network with pair probabilities from a block matrix.
pub fn simulate_replicate<R: Rng + ?Sized>(
    probs: &SymMatrix<f64>,
    z: &Partition,
    rng: &mut R,
) -> Network {
    let n = z.n();
    let lab = z.labels();
    let mut adj = vec![false; n * n];
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < probs.get(lab[i], lab[j]) {
                adj[i * n + j] = true;
                adj[j * n + i] = true;
            }
        }
    }
    Network::from_adjacency(n, adj)
}

/// Posterior predictive check. Replicates for draw `s` come from a ChaCha8
/// stream `s` of `seed`, so the result does not depend on thread count.
pub fn ppc(
    samples: &PosteriorSamples,
    g: &Network,
    seed: u64,
    draws_per_sample: usize,
) -> Result<PpcReport> {
    nonempty(samples)?;
    if draws_per_sample == 0 {
        return Err(Error::InvalidConfig(
            "draws_per_sample must be positive".into(),
        ));
    }
    let replicates: Vec<[Option<f64>; 6]> = samples
        .draws
        .par_iter()
        .enumerate()
        .flat_map_iter(|(s, d)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            let probs = block_probs(d);
            (0..draws_per_sample)
                .map(|_| network_stats(&simulate_replicate(&probs, &d.labels, &mut rng)).values())
                .collect::<Vec<_>>()
        })
        .collect();
    let observed = network_stats(g).values();
    let stats = STAT_NAMES
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let mut v: Vec<f64> = replicates
                .iter()
                .filter_map(|r| r[k])
                .filter(|x| x.is_finite())
                .collect();
            v.sort_by(f64::total_cmp);
            let dropped = replicates.len() - v.len();
            let q = |p: f64| (!v.is_empty()).then(|| quantile(&v, p));
            let pair = |a: f64, b: f64| q(a).zip(q(b));
            PpcStat {
                statistic: name.to_string(),
                observed: observed[k],
                median: q(0.5),
                ci95: pair(0.025, 0.975),
                ci99: pair(0.005, 0.995),
                n_used: v.len(),
                n_dropped: dropped,
            }
        })
        .collect();
    Ok(PpcReport { stats, replicates })
}

/// Pointwise log-likelihood of every pair under one draw, `i < j` order.
pub fn pointwise_log_lik(d: &Draw, g: &Network) -> Vec<f64> {
    let n = g.n();
    let z = d.labels.labels();
    let mut out = Vec::with_capacity(g.n_pairs());
    for i in 0..n {
        for j in i + 1..n {
            let eta = d.eta_block.get(z[i], z[j]);
            out.push(if g.has_edge(i, j) {
                log_probit(eta)
            } else {
                log_one_minus_probit(eta)
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockmodels::ModelKind;
    use crate::priors::ClusteringPrior;

    fn samples_with(draws: Vec<Draw>, n: usize) -> PosteriorSamples {
        PosteriorSamples {
            model: ModelKind::Cm,
            prior: ClusteringPrior::Dp { alpha: 1.0 },
            n,
            draws,
            trace: Vec::new(),
            final_step_eta: 0.3,
            final_step_u: 0.3,
        }
    }

    fn draw(labels: &[usize], upper: &[f64]) -> Draw {
        Draw {
            iter: 0,
            k_star: Partition::canonicalize(labels).unwrap().k(),
            labels: Partition::canonicalize(labels).unwrap(),
            eta_block: SymMatrix::from_upper(upper).unwrap(),
            loglik: 0.0,
        }
    }

    #[test]
    fn edge_probs_average() {
        // Phi^-1(0.2) and Phi^-1(0.6)
        let a = draw(&[0, 0], &[-0.841_621_233_572_914_3]);
        let b = draw(&[0, 0], &[0.253_347_103_135_799_7]);
        let p = posterior_edge_probs(&samples_with(vec![a, b], 2)).unwrap();
        assert!((p[1] - 0.4).abs() < 1e-12);
        assert_eq!(p[0], 0.0);
        assert!(posterior_edge_probs(&samples_with(vec![], 2)).is_err());
    }

    #[test]
    fn metrics_perfect_and_flat() {
        let g = Network::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let n = 4;
        let exact: Vec<f64> = (0..n * n)
            .map(|k| if g.has_edge(k / n, k % n) { 1.0 } else { 0.0 })
            .collect();
        let m = predictive_metrics(&exact, &g).unwrap();
        assert_eq!(m.auc, Some(1.0));
        assert!(m.mse < 1e-20);
        let flat = vec![0.5; n * n];
        let m = predictive_metrics(&flat, &g).unwrap();
        assert!((m.logloss - 2f64.ln()).abs() < 1e-12);
        assert_eq!(m.auc, Some(0.5));
        let empty = Network::from_edges(3, []).unwrap();
        assert_eq!(predictive_metrics(&[0.5; 9], &empty).unwrap().auc, None);
    }

    #[test]
    fn waic_two_draws_one_pair() {
        let g = Network::from_edges(2, [(0, 1)]).unwrap();
        // Phi^-1(0.5) = 0 and Phi^-1(0.25)
        let a = draw(&[0, 0], &[0.0]);
        let b = draw(&[0, 0], &[-0.674_489_750_196_081_7]);
        let w = waic(&samples_with(vec![a, b], 2), &g).unwrap();
        let (l1, l2) = (0.5f64.ln(), 0.25f64.ln());
        let lppd = ((0.5 + 0.25) / 2.0f64).ln();
        let m = (l1 + l2) / 2.0;
        let var = (l1 - m).powi(2) + (l2 - m).powi(2);
        assert!((w - (-2.0 * (lppd - var))).abs() < 1e-10, "{w}");
    }

    #[test]
    fn cluster_counts() {
        assert_eq!(cluster_count_summary(&[5, 5, 5]).unwrap(), (5, (5, 5)));
        assert_eq!(cluster_count_summary(&[4, 5, 5, 6]).unwrap().0, 5);
        assert_eq!(cluster_count_summary(&[6, 4, 5, 5]).unwrap().1, (4, 5));
    }

    #[test]
    fn quantile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert!((quantile(&v, 0.5) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn ppc_complete_graph() {
        let g = Network::from_edges(4, [(0, 1), (1, 2)]).unwrap();
        let d = draw(&[0, 0, 0, 0], &[40.0]);
        let rep = ppc(&samples_with(vec![d.clone(), d], 4), &g, 1, 3).unwrap();
        let dens = rep.stat("density").unwrap();
        assert_eq!(dens.ci95, Some((1.0, 1.0)));
        assert_eq!(dens.n_used, 6);
        // complete graph is regular
        assert_eq!(rep.stat("assortativity").unwrap().n_dropped, 6);
        assert!(rep.to_long_csv().lines().count() > 1);
    }
}
