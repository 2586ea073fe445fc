//! Gibbs-type clustering priors: Dirichlet-multinomial (DM), Dirichlet
//! process (DP), Pitman-Yor process (PYP) and Gnedin process (GNP).
//!
//! Each prior exposes its sequential allocation rule (used by the node
//! reassignment step of the sampler), the log mass of a partition, and an
//! elicitation routine that picks hyperparameters from a target number of
//! occupied clusters.

use std::fmt;
use std::str::FromStr;

use libm::lgamma as ln_gamma;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::Partition;

/// Family tag without parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorKind {
    Dm,
    Dp,
    Pyp,
    Gnp,
}

impl PriorKind {
    pub const ALL: [PriorKind; 4] = [PriorKind::Dm, PriorKind::Dp, PriorKind::Pyp, PriorKind::Gnp];

    pub fn as_str(self) -> &'static str {
        match self {
            PriorKind::Dm => "dm",
            PriorKind::Dp => "dp",
            PriorKind::Pyp => "pyp",
            PriorKind::Gnp => "gnp",
        }
    }
}

impl fmt::Display for PriorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PriorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dm" => Ok(PriorKind::Dm),
            "dp" => Ok(PriorKind::Dp),
            "pyp" | "py" => Ok(PriorKind::Pyp),
            "gnp" | "gn" => Ok(PriorKind::Gnp),
            other => Err(Error::InvalidPrior(format!("unknown prior `{other}`"))),
        }
    }
}

/// A clustering prior with its hyperparameters.
///
/// Serializes as `{"prior": "dp", "alpha": 1.086}` and so on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "prior", rename_all = "lowercase")]
pub enum ClusteringPrior {
    Dm {
        alpha: f64,
        #[serde(rename = "K")]
        k: usize,
    },
    Dp {
        alpha: f64,
    },
    Pyp {
        alpha: f64,
        sigma: f64,
    },
    Gnp {
        gamma: f64,
    },
}

impl ClusteringPrior {
    pub fn kind(&self) -> PriorKind {
        match self {
            ClusteringPrior::Dm { .. } => PriorKind::Dm,
            ClusteringPrior::Dp { .. } => PriorKind::Dp,
            ClusteringPrior::Pyp { .. } => PriorKind::Pyp,
            ClusteringPrior::Gnp { .. } => PriorKind::Gnp,
        }
    }

    /// Fixed number of labels for DM, `None` for the nonparametric priors.
    pub fn max_clusters(&self) -> Option<usize> {
        match self {
            ClusteringPrior::Dm { k, .. } => Some(*k),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ClusteringPrior::Dm { alpha, k } => alpha > 0.0 && alpha.is_finite() && k >= 1,
            ClusteringPrior::Dp { alpha } => alpha > 0.0 && alpha.is_finite(),
            ClusteringPrior::Pyp { alpha, sigma } => {
                (0.0..1.0).contains(&sigma) && alpha > -sigma && alpha.is_finite()
            }
            ClusteringPrior::Gnp { gamma } => gamma > 0.0 && gamma < 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidPrior(format!(
                "parameters out of range: {self:?}"
            )))
        }
    }

    /// Unnormalized weight for joining an existing cluster of size `n_k`
    /// when `n_excl` other items occupy `k_star` clusters.
    #[inline]
    pub fn existing_weight(&self, n_k: usize, n_excl: usize, k_star: usize) -> f64 {
        let n_k = n_k as f64;
        match *self {
            ClusteringPrior::Dm { alpha, k } => n_k + alpha / k as f64,
            ClusteringPrior::Dp { .. } => n_k,
            ClusteringPrior::Pyp { sigma, .. } => n_k - sigma,
            ClusteringPrior::Gnp { gamma } => (n_k + 1.0) * (n_excl as f64 - k_star as f64 + gamma),
        }
    }

    /// Unnormalized weight for opening a new cluster. For DM this is the
    /// collapsed weight of all currently unoccupied labels.
    #[inline]
    pub fn new_weight(&self, k_star: usize) -> f64 {
        let ks = k_star as f64;
        match *self {
            ClusteringPrior::Dm { alpha, k } => k.saturating_sub(k_star) as f64 * alpha / k as f64,
            ClusteringPrior::Dp { alpha } => alpha,
            ClusteringPrior::Pyp { alpha, sigma } => ks * sigma + alpha,
            ClusteringPrior::Gnp { gamma } => ks * (ks - gamma),
        }
    }
}

/// Prior weights for placing one item given the others.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationWeights {
    pub existing: Vec<f64>,
    /// `None` for DM once every label is occupied.
    pub new: Option<f64>,
}

impl AllocationWeights {
    pub fn total(&self) -> f64 {
        self.existing.iter().sum::<f64>() + self.new.unwrap_or(0.0)
    }

    pub fn normalized(&self) -> Self {
        let t = self.total();
        Self {
            existing: self.existing.iter().map(|w| w / t).collect(),
            new: self.new.map(|w| w / t),
        }
    }
}

/// Sequential allocation rule of `prior`.
///
/// `counts` holds the sizes of the occupied clusters excluding the item
/// being placed, `n_excl` their sum and `k_star` their number.
pub fn prior_allocation(
    prior: &ClusteringPrior,
    counts: &[usize],
    n_excl: usize,
    k_star: usize,
) -> Result<AllocationWeights> {
    prior.validate()?;
    if counts.len() != k_star || counts.contains(&0) {
        return Err(Error::InvalidPartition(format!(
            "counts {counts:?} inconsistent with K* = {k_star}"
        )));
    }
    if counts.iter().sum::<usize>() != n_excl {
        return Err(Error::InvalidPartition(format!(
            "counts sum to {}, expected {n_excl}",
            counts.iter().sum::<usize>()
        )));
    }
    if let Some(k) = prior.max_clusters() {
        if k_star > k {
            return Err(Error::InvalidPartition(format!(
                "K* = {k_star} exceeds K = {k}"
            )));
        }
    }
    let existing: Vec<f64> = counts
        .iter()
        .map(|&c| prior.existing_weight(c, n_excl, k_star))
        .collect();
    let new = match prior.max_clusters() {
        Some(k) if k_star == k => None,
        _ => Some(prior.new_weight(k_star)),
    };
    let w = AllocationWeights { existing, new };
    let total = w.total();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::Numerical(format!(
            "allocation weights sum to {total}"
        )));
    }
    Ok(w)
}

#[inline]
fn ln_rising(a: f64, m: usize) -> f64 {
    ln_gamma(a + m as f64) - ln_gamma(a)
}

fn ln_factorial(m: usize) -> f64 {
    ln_gamma(m as f64 + 1.0)
}

/// Log prior mass of a configuration with block sizes `sizes` (all > 0)
/// over `n` items.
///
/// For DP, PYP and GNP this is the mass of the unordered partition. For DM
/// it is the mass of one labelled assignment vector, so summing over all
/// label vectors in `{1..K}^n` gives one; it is `-inf` when more than `K`
/// blocks are present.
pub fn log_partition_mass(prior: &ClusteringPrior, sizes: &[usize], n: usize) -> Result<f64> {
    prior.validate()?;
    if sizes.contains(&0) || sizes.iter().sum::<usize>() != n || n == 0 {
        return Err(Error::InvalidPartition(format!(
            "sizes {sizes:?} do not form a partition of {n}"
        )));
    }
    let n_f = n as f64;
    let k_star = sizes.len();
    let mass = match *prior {
        ClusteringPrior::Dm { alpha, k } => {
            if k_star > k {
                f64::NEG_INFINITY
            } else {
                let a = alpha / k as f64;
                ln_gamma(alpha) - ln_gamma(n_f + alpha)
                    + sizes
                        .iter()
                        .map(|&s| ln_gamma(s as f64 + a) - ln_gamma(a))
                        .sum::<f64>()
            }
        }
        ClusteringPrior::Dp { alpha } => {
            ln_gamma(alpha) - ln_gamma(alpha + n_f)
                + k_star as f64 * alpha.ln()
                + sizes.iter().map(|&s| ln_gamma(s as f64)).sum::<f64>()
        }
        ClusteringPrior::Pyp { alpha, sigma } => {
            // prod_{k=1}^{K*-1} (alpha + k sigma) / (alpha+1)_{n-1} * prod (1-sigma)_{n_k-1}
            (1..k_star)
                .map(|k| (alpha + k as f64 * sigma).ln())
                .sum::<f64>()
                - ln_rising(alpha + 1.0, n - 1)
                + sizes
                    .iter()
                    .map(|&s| ln_rising(1.0 - sigma, s - 1))
                    .sum::<f64>()
        }
        ClusteringPrior::Gnp { gamma } => gnp_log_mass(sizes, n, gamma),
    };
    Ok(mass)
}

/// Closed-form Gnedin partition mass, the product of the sequential
/// allocation probabilities:
/// `(K-1)! (1-g)_{K-1} (g)_{n-K} prod n_k! / ((n-1)! (1+g)_{n-1})`.
fn gnp_log_mass(sizes: &[usize], n: usize, gamma: f64) -> f64 {
    let k = sizes.len();
    ln_factorial(k - 1)
        + ln_rising(1.0 - gamma, k - 1)
        + ln_rising(gamma, n - k)
        + sizes.iter().map(|&s| ln_factorial(s)).sum::<f64>()
        - ln_factorial(n - 1)
        - ln_rising(1.0 + gamma, n - 1)
}

/// `Pr(K = k) = gamma (1-gamma)_{k-1} / k!` for the Gnedin number of
/// components.
pub fn gnp_component_log_pmf(k: usize, gamma: f64) -> f64 {
    gamma.ln() + ln_rising(1.0 - gamma, k - 1) - ln_factorial(k)
}

/// Mixture representation of the Gnedin mass: components with `K = k`
/// labels and symmetric Dirichlet(1, ..., 1) weights, mixed over
/// `Pr(K = k)` and truncated after `k_max`.
///
/// Returns the truncated mass and the bound `Pr(K > k_max)` on the omitted
/// tail. Converges slowly (the tail decays like `k^-gamma`), so this is only
/// a reference for the closed form used by [`log_partition_mass`].
pub fn gnp_mixture_mass(sizes: &[usize], gamma: f64, k_max: usize) -> (f64, f64) {
    let n: usize = sizes.iter().sum();
    let k_star = sizes.len();
    let mut mass = 0.0;
    for k in k_star.max(1)..=k_max {
        // unordered partition mass under Dir(1,..,1) with k labels
        let kf = k as f64;
        let labelled = ln_gamma(kf) - ln_gamma(n as f64 + kf)
            + sizes.iter().map(|&s| ln_factorial(s)).sum::<f64>();
        let arrangements = ln_factorial(k) - ln_factorial(k - k_star);
        mass += (gnp_component_log_pmf(k, gamma) + labelled + arrangements).exp();
    }
    let tail =
        (ln_gamma(k_max as f64 + 1.0 - gamma) - ln_gamma(1.0 - gamma) - ln_factorial(k_max)).exp();
    (mass, tail)
}

/// `floor(n / mean_degree)` clamped to `[1, n]`.
pub fn elicit_target(n: usize, mean_degree: f64) -> usize {
    if mean_degree.is_nan() || mean_degree <= 0.0 {
        return n;
    }
    ((n as f64 / mean_degree).floor() as usize).clamp(1, n)
}

/// Picks prior hyperparameters so that the prior expected number of
/// occupied clusters matches `floor(n / mean_degree)`.
///
/// `k_dm` is the number of labels for DM; it defaults to the target.
pub fn elicit(
    kind: PriorKind,
    n: usize,
    mean_degree: f64,
    k_dm: Option<usize>,
) -> Result<ClusteringPrior> {
    if n <= 1 {
        return Err(Error::InvalidPrior(format!("cannot elicit for n = {n}")));
    }
    if !(mean_degree > 0.0 && mean_degree.is_finite()) {
        return Err(Error::InvalidPrior(format!(
            "mean degree must be positive, got {mean_degree}"
        )));
    }
    let target = elicit_target(n, mean_degree);
    let t = target as f64;
    let log_n = (n as f64).ln();
    let prior = match kind {
        PriorKind::Dm => {
            let alpha = solve_dm_alpha(t, n as f64)?;
            ClusteringPrior::Dm {
                alpha,
                k: k_dm.unwrap_or(target).max(1),
            }
        }
        PriorKind::Dp => ClusteringPrior::Dp { alpha: t / log_n },
        PriorKind::Pyp => {
            let sigma = t.ln() / log_n;
            if sigma <= 0.0 {
                // target of one cluster: discount vanishes, use the DP rule
                ClusteringPrior::Pyp {
                    alpha: t / log_n,
                    sigma: 0.0,
                }
            } else {
                let sigma = sigma.min(1.0 - 1e-9);
                ClusteringPrior::Pyp {
                    alpha: sigma * t / (n as f64).powf(sigma),
                    sigma,
                }
            }
        }
        PriorKind::Gnp => ClusteringPrior::Gnp {
            gamma: t / (t + log_n),
        },
    };
    prior.validate()?;
    Ok(prior)
}

/// Solves `target = alpha * ln((alpha + n) / alpha)` by bisection.
fn solve_dm_alpha(target: f64, n: f64) -> Result<f64> {
    let f = |a: f64| a * ((a + n) / a).ln() - target;
    let (mut lo, mut hi) = (1e-8_f64, 1e8_f64);
    if f(lo) > 0.0 || f(hi) < 0.0 {
        return Err(Error::Numerical(format!(
            "DM elicitation: target {target} not bracketed on [1e-8, 1e8] for n = {n}"
        )));
    }
    // bisect in log space; the bracket spans 16 decades
    while hi - lo > 1e-10 * hi {
        let mid = (lo * hi).sqrt();
        let mid = if mid <= lo || mid >= hi {
            0.5 * (lo + hi)
        } else {
            mid
        };
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Draws a partition of `n` items by running the allocation rule forward.
/// DM opens the lowest unused label, which keeps labels canonical.
pub fn simulate_partition<R: Rng + ?Sized>(
    prior: &ClusteringPrior,
    n: usize,
    rng: &mut R,
) -> Result<Partition> {
    prior.validate()?;
    let mut labels = Vec::with_capacity(n);
    let mut counts: Vec<usize> = Vec::new();
    for i in 0..n {
        let k = if i == 0 {
            0
        } else {
            let w = prior_allocation(prior, &counts, i, counts.len())?;
            let mut u = rng.random::<f64>() * w.total();
            let mut pick = counts.len();
            for (k, &wk) in w.existing.iter().enumerate() {
                if u < wk {
                    pick = k;
                    break;
                }
                u -= wk;
            }
            if pick == counts.len() && w.new.is_none() {
                pick = counts.len() - 1;
            }
            pick
        };
        if k == counts.len() {
            counts.push(0);
        }
        counts[k] += 1;
        labels.push(k);
    }
    Partition::canonicalize(&labels)
}
