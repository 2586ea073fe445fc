//! MCMC for the class model and the hybrid class models.
//!
//! One sweep updates, in order:
//!
//! * CM: every block intercept (Metropolis), `zeta` and `tau2` (Gibbs),
//!   then every node assignment.
//! * CDM / CBM: every latent position (Metropolis), the global intercept
//!   (Metropolis), `sigma2` and the intercept variance (Gibbs), then every
//!   node assignment.
//!
//! Node reassignment under DP, PYP and GNP uses one auxiliary empty cluster
//! per node update whose parameters are drawn from their prior (or, when
//! the node sits alone, taken from its current cluster). Under DM the
//! mixture weights are sampled explicitly and every one of the `K` labels
//! is a candidate.

mod chain;
pub mod kernels;

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use chain::{AuxParams, Candidate, Chain};

use crate::blockmodels::{ModelKind, SymMatrix};
use crate::error::{Error, Result};
use crate::graph::Network;
use crate::partition::Partition;
use crate::priors::{elicit_target, ClusteringPrior};

/// Fixed hyperparameters of the hierarchical priors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyper {
    pub mu_zeta: f64,
    pub s2_zeta: f64,
    pub a_tau: f64,
    pub b_tau: f64,
    pub a_sigma: f64,
    pub b_sigma: f64,
}

impl Default for Hyper {
    fn default() -> Self {
        Self {
            mu_zeta: 0.0,
            s2_zeta: 3.0,
            a_tau: 3.0,
            b_tau: 2.0,
            a_sigma: 3.0,
            b_sigma: 2.0,
        }
    }
}

/// Prior variance of the hybrid intercept when `fixed_eta_variance` is set.
pub const FIXED_ETA_VARIANCE: f64 = 3.0;

/// Sweeps between step-size adjustments during burn-in.
pub const ADAPT_WINDOW: usize = 100;
/// Target acceptance band for adaptation.
pub const ADAPT_BAND: (f64, f64) = (0.30, 0.45);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainConfig {
    pub burn_in: usize,
    pub n_samples: usize,
    pub thin: usize,
    pub seed: u64,
    pub mh_step_eta: f64,
    pub mh_step_u: f64,
    pub adapt: bool,
    pub hyper: Hyper,
    /// Initial number of clusters; defaults to `floor(n / mean degree)`.
    #[serde(rename = "init_K")]
    pub init_k: Option<usize>,
    /// Hybrid models: hold the intercept prior at `N(0, 3)` instead of
    /// sampling its variance.
    pub fixed_eta_variance: bool,
    /// Visit nodes in a fresh random order each sweep.
    pub random_scan: bool,
    /// Class model, nonparametric priors: multiply the new-cluster weight by
    /// the prior density of its auxiliary intercepts.
    pub literal_new_cluster_factor: bool,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            burn_in: 10_000,
            n_samples: 2_000,
            thin: 10,
            seed: 0,
            mh_step_eta: 0.3,
            mh_step_u: 0.3,
            adapt: true,
            hyper: Hyper::default(),
            init_k: None,
            fixed_eta_variance: false,
            random_scan: false,
            literal_new_cluster_factor: false,
        }
    }
}

impl ChainConfig {
    /// Long-run settings: 100,000 burn-in sweeps, thinning 50, 10,000 draws.
    pub fn paper_scale() -> Self {
        Self {
            burn_in: 100_000,
            n_samples: 10_000,
            thin: 50,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let h = &self.hyper;
        let bad = |what: &str| Err(Error::InvalidConfig(what.to_string()));
        if self.thin == 0 {
            return bad("thin must be at least 1");
        }
        if !(self.mh_step_eta > 0.0 && self.mh_step_u > 0.0) {
            return bad("Metropolis step sizes must be positive");
        }
        if !(h.s2_zeta > 0.0
            && h.a_tau > 0.0
            && h.b_tau > 0.0
            && h.a_sigma > 0.0
            && h.b_sigma > 0.0)
        {
            return bad("variance hyperparameters must be positive");
        }
        if self.init_k == Some(0) {
            return bad("init_K must be positive");
        }
        Ok(())
    }
}

/// One retained draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Draw {
    pub iter: usize,
    #[serde(rename = "K_star")]
    pub k_star: usize,
    pub labels: Partition,
    /// Block interaction matrix of the occupied clusters, upper triangle.
    #[serde(rename = "eta")]
    pub eta_block: SymMatrix<f64>,
    pub loglik: f64,
}

impl Draw {
    /// `(ln Phi(eta_kl), ln(1 - Phi(eta_kl)))` per block: the pointwise
    /// log-likelihood of an edge and of a non-edge in that block.
    pub fn cell_log_terms(&self) -> SymMatrix<(f64, f64)> {
        use crate::blockmodels::{log_one_minus_probit, log_probit};
        let e = &self.eta_block;
        SymMatrix::from_fn(e.dim(), |a, b| {
            let v = e.get(a, b);
            (log_probit(v), log_one_minus_probit(v))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    #[serde(rename = "K_star")]
    pub k_star: usize,
    pub loglik: f64,
    /// Acceptance of the intercept kernel since the previous retained draw.
    pub accept_eta: f64,
    /// Acceptance of the latent-position kernel (hybrid models only).
    pub accept_u: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSamples {
    pub model: ModelKind,
    pub prior: ClusteringPrior,
    pub n: usize,
    pub draws: Vec<Draw>,
    pub trace: Vec<TraceRow>,
    pub final_step_eta: f64,
    pub final_step_u: f64,
}

impl PosteriorSamples {
    pub fn partitions(&self) -> Vec<Partition> {
        self.draws.iter().map(|d| d.labels.clone()).collect()
    }

    pub fn k_stars(&self) -> Vec<usize> {
        self.draws.iter().map(|d| d.k_star).collect()
    }

    /// One JSON object per line per draw.
    pub fn write_checkpoints<W: Write>(&self, mut out: W) -> Result<()> {
        for d in &self.draws {
            serde_json::to_writer(&mut out, d)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_checkpoints(text: &str) -> Result<Vec<Draw>> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(Error::from))
            .collect()
    }

    /// CSV with columns `iter,K_star,loglik,accept_rates`.
    pub fn write_trace<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "iter,K_star,loglik,accept_rates")?;
        for t in &self.trace {
            let rates = match t.accept_u {
                Some(u) => format!("eta={:.4};u={:.4}", t.accept_eta, u),
                None => format!("eta={:.4}", t.accept_eta),
            };
            writeln!(out, "{},{},{},{}", t.iter, t.k_star, t.loglik, rates)?;
        }
        Ok(())
    }
}

/// Multiplicative step-size adjustment toward the acceptance band.
pub fn adapt_step(step: f64, rate: f64) -> f64 {
    if rate < ADAPT_BAND.0 {
        step * 0.9
    } else if rate > ADAPT_BAND.1 {
        step * 1.1
    } else {
        step
    }
}

/// Runs a full chain: random initialization, burn-in with optional
/// adaptation, then `n_samples` draws spaced `thin` sweeps apart.
pub fn run_chain(
    kind: ModelKind,
    g: &Network,
    prior: ClusteringPrior,
    cfg: &ChainConfig,
) -> Result<PosteriorSamples> {
    cfg.validate()?;
    let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    run_chain_with_rng(kind, g, prior, cfg, rng)
}

/// As [`run_chain`] with an explicit generator, so that callers can hand
/// out independent streams.
pub fn run_chain_with_rng(
    kind: ModelKind,
    g: &Network,
    prior: ClusteringPrior,
    cfg: &ChainConfig,
    rng: ChaCha8Rng,
) -> Result<PosteriorSamples> {
    cfg.validate()?;
    let init_k = cfg
        .init_k
        .unwrap_or_else(|| elicit_target(g.n(), g.mean_degree()));
    let mut chain = Chain::new(kind, prior, cfg.clone(), g, init_k, rng)?;

    for sweep in 1..=cfg.burn_in {
        chain.sweep(g)?;
        if cfg.adapt && sweep % ADAPT_WINDOW == 0 {
            let (eta_acc, u_acc) = chain.take_acceptance();
            chain.step_eta = adapt_step(chain.step_eta, eta_acc.rate());
            if kind.is_hybrid() {
                chain.step_u = adapt_step(chain.step_u, u_acc.rate());
            }
        }
    }
    chain.take_acceptance();

    let mut draws = Vec::with_capacity(cfg.n_samples);
    let mut trace = Vec::with_capacity(cfg.n_samples);
    for d in 0..cfg.n_samples {
        for _ in 0..cfg.thin {
            chain.sweep(g)?;
        }
        let iter = cfg.burn_in + (d + 1) * cfg.thin;
        let draw = chain.draw(iter)?;
        let (eta_acc, u_acc) = chain.take_acceptance();
        trace.push(TraceRow {
            iter,
            k_star: draw.k_star,
            loglik: draw.loglik,
            accept_eta: eta_acc.rate(),
            accept_u: kind.is_hybrid().then(|| u_acc.rate()),
        });
        draws.push(draw);
    }

    Ok(PosteriorSamples {
        model: kind,
        prior,
        n: g.n(),
        draws,
        trace,
        final_step_eta: chain.step_eta,
        final_step_u: chain.step_u,
    })
}
