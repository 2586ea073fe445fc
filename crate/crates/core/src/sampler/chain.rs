use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use super::kernels::{self, sample_inverse_gamma, std_normal, Acceptance};
use super::{ChainConfig, Draw, FIXED_ETA_VARIANCE};
use crate::blockmodels::{
    block_stats_from_labels, eta_matrix, log_likelihood, log_one_minus_probit, log_probit,
    BlockStats, CmState, HybridState, ModelKind, ModelState, SymMatrix,
};
use crate::error::{Error, Result};
use crate::graph::Network;
use crate::partition::Partition;
use crate::priors::ClusteringPrior;

/// Parameters of an auxiliary (not yet occupied) cluster.
#[derive(Debug, Clone, PartialEq)]
pub enum AuxParams {
    /// Class model: intercepts against each existing cluster, then the
    /// diagonal intercept.
    CmRow(Vec<f64>),
    /// Hybrid models: a latent position.
    Latent(Vec<f64>),
}

/// A reassignment option for one node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Candidate {
    /// Cluster slot, in the chain's current indexing.
    Existing(usize),
    Auxiliary,
}

/// State of one Markov chain.
///
/// Cluster slots are indexed `0..k()`. Under the nonparametric priors every
/// slot is occupied at the end of a sweep; under DM there are always `K`
/// slots and some may be empty. After every sweep slots are reordered so
/// that occupied ones come first in order of first appearance.
#[derive(Debug, Clone)]
pub struct Chain {
    kind: ModelKind,
    prior: ClusteringPrior,
    cfg: ChainConfig,
    rng: ChaCha8Rng,
    labels: Vec<usize>,
    sizes: Vec<usize>,
    state: ModelState,
    log_omega: Option<Vec<f64>>,
    stats: BlockStats,
    lp: SymMatrix<f64>,
    lq: SymMatrix<f64>,
    pub step_eta: f64,
    pub step_u: f64,
    acc_eta: Acceptance,
    acc_u: Acceptance,
}

impl Chain {
    /// Random start: labels uniform on `init_k` clusters, parameters drawn
    /// from their priors.
    pub fn new(
        kind: ModelKind,
        prior: ClusteringPrior,
        cfg: ChainConfig,
        g: &Network,
        init_k: usize,
        mut rng: ChaCha8Rng,
    ) -> Result<Self> {
        kind.validate()?;
        prior.validate()?;
        cfg.validate()?;
        let n = g.n();
        let mut init_k = init_k.clamp(1, n);
        if let Some(k) = prior.max_clusters() {
            init_k = init_k.min(k);
        }
        let raw: Vec<usize> = (0..n).map(|_| rng.random_range(0..init_k)).collect();
        let z = Partition::canonicalize(&raw)?;
        let slots = prior.max_clusters().unwrap_or(z.k());
        let state = sample_state_from_prior(&kind, &cfg, slots, &mut rng);
        let log_omega = prior.max_clusters().map(|k| {
            let alpha = dm_alpha(&prior);
            sample_log_dirichlet(&mut rng, &vec![alpha / k as f64; k])
        });
        Self::assemble(
            kind,
            prior,
            cfg,
            g,
            z.labels().to_vec(),
            state,
            log_omega,
            rng,
        )
    }

    /// Starts from a given configuration. `state` must carry one slot per
    /// cluster of `z` (or `K` slots under DM). `omega` is required for DM.
    #[allow(clippy::too_many_arguments)]
    pub fn with_state(
        kind: ModelKind,
        prior: ClusteringPrior,
        cfg: ChainConfig,
        g: &Network,
        z: &Partition,
        state: ModelState,
        omega: Option<Vec<f64>>,
        rng: ChaCha8Rng,
    ) -> Result<Self> {
        kind.validate()?;
        prior.validate()?;
        cfg.validate()?;
        if z.n() != g.n() {
            return Err(Error::LengthMismatch {
                left: z.n(),
                right: g.n(),
            });
        }
        eta_matrix(&kind, &state)?;
        let slots = prior.max_clusters().unwrap_or(z.k());
        if state.k() != slots || z.k() > slots {
            return Err(Error::Dimension(format!(
                "state has {} clusters, expected {slots}",
                state.k()
            )));
        }
        let log_omega = match (prior.max_clusters(), omega) {
            (Some(k), Some(w)) if w.len() == k => Some(w.iter().map(|x| x.ln()).collect()),
            (Some(_), _) => {
                return Err(Error::Dimension("DM prior needs omega of length K".into()))
            }
            (None, _) => None,
        };
        Self::assemble(
            kind,
            prior,
            cfg,
            g,
            z.labels().to_vec(),
            state,
            log_omega,
            rng,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        kind: ModelKind,
        prior: ClusteringPrior,
        cfg: ChainConfig,
        g: &Network,
        labels: Vec<usize>,
        state: ModelState,
        log_omega: Option<Vec<f64>>,
        rng: ChaCha8Rng,
    ) -> Result<Self> {
        let slots = state.k();
        let mut sizes = vec![0; slots];
        for &c in &labels {
            sizes[c] += 1;
        }
        let stats = block_stats_from_labels(g, &labels, slots);
        let mut chain = Self {
            kind,
            prior,
            step_eta: cfg.mh_step_eta,
            step_u: cfg.mh_step_u,
            cfg,
            rng,
            labels,
            sizes,
            state,
            log_omega,
            stats,
            lp: SymMatrix::filled(0, 0.0),
            lq: SymMatrix::filled(0, 0.0),
            acc_eta: Acceptance::default(),
            acc_u: Acceptance::default(),
        };
        chain.refresh_log_probs();
        Ok(chain)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn state(&self) -> &ModelState {
        &self.state
    }

    pub fn stats(&self) -> &BlockStats {
        &self.stats
    }

    /// Raw slot labels, 0-based.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn partition(&self) -> Partition {
        Partition::canonicalize(&self.labels).expect("n >= 2")
    }

    /// Number of occupied clusters.
    pub fn k_star(&self) -> usize {
        self.sizes.iter().filter(|&&s| s > 0).count()
    }

    /// Number of parameter slots.
    pub fn k(&self) -> usize {
        self.state.k()
    }

    /// DM mixture weights.
    pub fn omega(&self) -> Option<Vec<f64>> {
        self.log_omega
            .as_ref()
            .map(|w| w.iter().map(|x| x.exp()).collect())
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Recomputes block statistics after the network changed.
    pub fn resync(&mut self, g: &Network) {
        self.stats = block_stats_from_labels(g, &self.labels, self.k());
    }

    /// Intercept and latent-position acceptance since the last call.
    pub fn take_acceptance(&mut self) -> (Acceptance, Acceptance) {
        (
            std::mem::take(&mut self.acc_eta),
            std::mem::take(&mut self.acc_u),
        )
    }

    /// One full sweep of every kernel.
    pub fn sweep(&mut self, g: &Network) -> Result<()> {
        self.update_parameters();
        self.update_assignments(g)
    }

    /// Continuous-parameter kernels only.
    pub fn update_parameters(&mut self) {
        let hyper = self.cfg.hyper;
        match (&self.kind, &mut self.state) {
            (ModelKind::Cm, ModelState::Cm(st)) => {
                let acc = kernels::update_eta_block(st, &self.stats, &mut self.rng, self.step_eta);
                self.acc_eta.add(acc);
                kernels::update_zeta(st, &hyper, &mut self.rng);
                kernels::update_tau2_cm(st, &hyper, &mut self.rng);
            }
            (kind, ModelState::Hybrid(st)) => {
                let q = kind.latent_dim().expect("hybrid kind");
                let acc = kernels::update_latent_positions(
                    st,
                    kind,
                    &self.stats,
                    &mut self.rng,
                    self.step_u,
                );
                self.acc_u.add(acc);
                let prior_var = if self.cfg.fixed_eta_variance {
                    FIXED_ETA_VARIANCE
                } else {
                    st.tau2
                };
                let acc = kernels::update_global_eta(
                    st,
                    kind,
                    &self.stats,
                    prior_var,
                    &mut self.rng,
                    self.step_eta,
                );
                self.acc_eta.add(acc);
                kernels::update_sigma2(st, q, &hyper, &mut self.rng);
                if !self.cfg.fixed_eta_variance {
                    kernels::update_eta_variance(st, &hyper, &mut self.rng);
                }
            }
            _ => unreachable!("state matches kind by construction"),
        }
        self.refresh_log_probs();
    }

    /// Reassigns every node, then relabels and (DM) redraws the weights.
    pub fn update_assignments(&mut self, g: &Network) -> Result<()> {
        let mut order: Vec<usize> = (0..g.n()).collect();
        if self.cfg.random_scan {
            order.shuffle(&mut self.rng);
        }
        for i in order {
            self.reassign(g, i)?;
        }
        self.canonical_reorder();
        if let Some(k) = self.prior.max_clusters() {
            let a = dm_alpha(&self.prior) / k as f64;
            let conc: Vec<f64> = self.sizes.iter().map(|&s| a + s as f64).collect();
            self.log_omega = Some(sample_log_dirichlet(&mut self.rng, &conc));
        }
        Ok(())
    }

    /// Log weights of every reassignment option for node `i`, with `aux`
    /// as the auxiliary cluster. When `i` is alone in its cluster under a
    /// nonparametric prior, pass `None` to reuse its current parameters.
    /// Does not change the chain.
    pub fn node_conditional(
        &self,
        g: &Network,
        i: usize,
        aux: Option<AuxParams>,
    ) -> Result<Vec<(Candidate, f64)>> {
        let mut scratch = self.clone();
        let e = scratch.neighbor_counts(g, i);
        let a = scratch.labels[i];
        scratch.detach(a, &e);
        let singleton = scratch.prior.max_clusters().is_none() && scratch.sizes[a] == 0;
        let aux = match (aux, singleton) {
            (None, true) => None,
            (Some(p), false) => Some(p),
            (None, false) if scratch.prior.max_clusters().is_some() => None,
            _ => {
                return Err(Error::InvalidConfig(
                    "auxiliary parameters must be given unless the node is a singleton".into(),
                ))
            }
        };
        let aux_logs = aux.as_ref().map(|p| scratch.aux_log_probs(p));
        Ok(scratch.candidate_log_weights(&e, a, singleton, aux.as_ref(), aux_logs.as_ref()))
    }

    fn reassign(&mut self, g: &Network, i: usize) -> Result<()> {
        let e = self.neighbor_counts(g, i);
        let a = self.labels[i];
        self.detach(a, &e);
        let parametric = self.prior.max_clusters().is_some();
        let singleton = !parametric && self.sizes[a] == 0;
        let aux = (!parametric && !singleton).then(|| self.sample_aux());
        let aux_logs = aux.as_ref().map(|p| self.aux_log_probs(p));
        let weights = self.candidate_log_weights(&e, a, singleton, aux.as_ref(), aux_logs.as_ref());
        let pick = sample_log_categorical(&mut self.rng, weights.iter().map(|w| w.1)).ok_or_else(
            || Error::Numerical(format!("all reassignment weights vanish at node {}", i + 1)),
        )?;
        match weights[pick].0 {
            Candidate::Existing(k) => {
                self.attach(i, k, &e);
                if singleton && k != a {
                    self.remove_slot(a);
                }
            }
            Candidate::Auxiliary if singleton => self.attach(i, a, &e),
            Candidate::Auxiliary => {
                let (p, (lp, lq)) = (aux.expect("drawn"), aux_logs.expect("drawn"));
                self.push_slot(p, lp, lq);
                let mut e = e;
                e.push(0);
                let k = self.k() - 1;
                self.attach(i, k, &e);
            }
        }
        Ok(())
    }

    /// Edges from node `i` into each slot.
    fn neighbor_counts(&self, g: &Network, i: usize) -> Vec<u64> {
        let mut e = vec![0u64; self.k()];
        for &j in g.neighbors(i) {
            e[self.labels[j]] += 1;
        }
        e
    }

    /// Removes a node currently in slot `a` from sizes and block counts.
    fn detach(&mut self, a: usize, e: &[u64]) {
        self.sizes[a] -= 1;
        for l in 0..self.k() {
            let c = self.sizes[l] as u64;
            self.stats.m.update(a, l, |v| v - c);
            self.stats.s.update(a, l, |v| v - e[l]);
        }
    }

    fn attach(&mut self, i: usize, b: usize, e: &[u64]) {
        for l in 0..self.k() {
            let c = self.sizes[l] as u64;
            self.stats.m.update(b, l, |v| v + c);
            self.stats.s.update(b, l, |v| v + e[l]);
        }
        self.sizes[b] += 1;
        self.labels[i] = b;
    }

    fn candidate_log_weights(
        &self,
        e: &[u64],
        a: usize,
        singleton: bool,
        aux: Option<&AuxParams>,
        aux_logs: Option<&(Vec<f64>, Vec<f64>)>,
    ) -> Vec<(Candidate, f64)> {
        let k = self.k();
        let lik = |lp: &dyn Fn(usize) -> f64, lq: &dyn Fn(usize) -> f64| -> f64 {
            let mut v = 0.0;
            for l in 0..k {
                let c = self.sizes[l] as u64;
                if c == 0 {
                    continue;
                }
                if e[l] > 0 {
                    v += e[l] as f64 * lp(l);
                }
                if c > e[l] {
                    v += (c - e[l]) as f64 * lq(l);
                }
            }
            v
        };
        let mut out = Vec::with_capacity(k + 1);
        if let Some(log_omega) = &self.log_omega {
            for slot in 0..k {
                let ll = lik(&|l| self.lp.get(slot, l), &|l| self.lq.get(slot, l));
                out.push((Candidate::Existing(slot), log_omega[slot] + ll));
            }
            return out;
        }

        let n_excl: usize = self.sizes.iter().sum();
        let k_star = self.sizes.iter().filter(|&&s| s > 0).count();
        for slot in 0..k {
            if self.sizes[slot] == 0 {
                continue;
            }
            let w = self.prior.existing_weight(self.sizes[slot], n_excl, k_star);
            let ll = lik(&|l| self.lp.get(slot, l), &|l| self.lq.get(slot, l));
            out.push((Candidate::Existing(slot), w.ln() + ll));
        }
        let mut w_new = self.prior.new_weight(k_star).ln();
        let ll = if singleton {
            lik(&|l| self.lp.get(a, l), &|l| self.lq.get(a, l))
        } else {
            let (lp, lq) = aux_logs.expect("auxiliary cluster for non-singleton");
            lik(&|l| lp[l], &|l| lq[l])
        };
        if self.cfg.literal_new_cluster_factor {
            w_new += self.literal_factor(a, singleton, aux);
        }
        out.push((Candidate::Auxiliary, w_new + ll));
        out
    }

    /// `sum_l ln N(eta*_l | zeta, tau2)` over the auxiliary intercepts.
    fn literal_factor(&self, a: usize, singleton: bool, aux: Option<&AuxParams>) -> f64 {
        let ModelState::Cm(st) = &self.state else {
            return 0.0;
        };
        let log_n = |x: f64| {
            -0.5 * (2.0 * std::f64::consts::PI * st.tau2).ln()
                - (x - st.zeta).powi(2) / (2.0 * st.tau2)
        };
        if singleton {
            (0..self.k())
                .filter(|&l| l == a || self.sizes[l] > 0)
                .map(|l| log_n(st.eta_block.get(a, l)))
                .sum()
        } else if let Some(AuxParams::CmRow(row)) = aux {
            (0..self.k())
                .filter(|&l| self.sizes[l] > 0)
                .map(|l| row[l])
                .chain(std::iter::once(row[self.k()]))
                .map(log_n)
                .sum()
        } else {
            0.0
        }
    }

    fn sample_aux(&mut self) -> AuxParams {
        let k = self.k();
        match &self.state {
            ModelState::Cm(st) => {
                let sd = st.tau2.sqrt();
                let (zeta, rng) = (st.zeta, &mut self.rng);
                AuxParams::CmRow((0..=k).map(|_| zeta + sd * std_normal(rng)).collect())
            }
            ModelState::Hybrid(st) => {
                let q = self.kind.latent_dim().expect("hybrid kind");
                let sd = st.sigma2.sqrt();
                let rng = &mut self.rng;
                AuxParams::Latent((0..q).map(|_| sd * std_normal(rng)).collect())
            }
        }
    }

    /// Log edge / non-edge probabilities of an auxiliary cluster against
    /// every slot, followed by its own diagonal entry.
    fn aux_log_probs(&self, aux: &AuxParams) -> (Vec<f64>, Vec<f64>) {
        let etas: Vec<f64> = match (aux, &self.state) {
            (AuxParams::CmRow(row), _) => row.clone(),
            (AuxParams::Latent(u), ModelState::Hybrid(st)) => {
                st.u.iter()
                    .map(|v| self.kind.hybrid_eta(st.eta, u, v))
                    .chain(std::iter::once(self.kind.hybrid_eta(st.eta, u, u)))
                    .collect()
            }
            (AuxParams::Latent(_), ModelState::Cm(_)) => {
                panic!("latent auxiliary for the class model")
            }
        };
        (
            etas.iter().map(|&x| log_probit(x)).collect(),
            etas.iter().map(|&x| log_one_minus_probit(x)).collect(),
        )
    }

    fn push_slot(&mut self, aux: AuxParams, lp: Vec<f64>, lq: Vec<f64>) {
        match (&mut self.state, aux) {
            (ModelState::Cm(st), AuxParams::CmRow(row)) => st.eta_block.push(&row),
            (ModelState::Hybrid(st), AuxParams::Latent(u)) => st.u.push(u),
            _ => unreachable!("auxiliary matches model"),
        }
        let zeros = vec![0u64; self.sizes.len() + 1];
        self.stats.s.push(&zeros);
        self.stats.m.push(&zeros);
        self.lp.push(&lp);
        self.lq.push(&lq);
        self.sizes.push(0);
    }

    fn remove_slot(&mut self, a: usize) {
        debug_assert_eq!(self.sizes[a], 0);
        match &mut self.state {
            ModelState::Cm(st) => st.eta_block.remove(a),
            ModelState::Hybrid(st) => {
                st.u.remove(a);
            }
        }
        self.stats.s.remove(a);
        self.stats.m.remove(a);
        self.lp.remove(a);
        self.lq.remove(a);
        self.sizes.remove(a);
        for x in &mut self.labels {
            if *x > a {
                *x -= 1;
            }
        }
    }

    /// Orders slots by first appearance, unoccupied slots last.
    fn canonical_reorder(&mut self) {
        let k = self.k();
        let mut seen = vec![false; k];
        let mut order = Vec::with_capacity(k);
        for &c in &self.labels {
            if !seen[c] {
                seen[c] = true;
                order.push(c);
            }
        }
        order.extend((0..k).filter(|&c| !seen[c]));
        if order.iter().enumerate().all(|(a, &b)| a == b) {
            return;
        }
        let mut inverse = vec![0; k];
        for (new, &old) in order.iter().enumerate() {
            inverse[old] = new;
        }
        for x in &mut self.labels {
            *x = inverse[*x];
        }
        self.sizes = order.iter().map(|&o| self.sizes[o]).collect();
        match &mut self.state {
            ModelState::Cm(st) => st.eta_block = st.eta_block.select(&order),
            ModelState::Hybrid(st) => st.u = order.iter().map(|&o| st.u[o].clone()).collect(),
        }
        if let Some(w) = &mut self.log_omega {
            *w = order.iter().map(|&o| w[o]).collect();
        }
        self.stats.s = self.stats.s.select(&order);
        self.stats.m = self.stats.m.select(&order);
        self.lp = self.lp.select(&order);
        self.lq = self.lq.select(&order);
    }

    fn refresh_log_probs(&mut self) {
        let etas = eta_matrix(&self.kind, &self.state).expect("state matches kind");
        self.lp = SymMatrix::from_fn(etas.dim(), |a, b| log_probit(etas.get(a, b)));
        self.lq = SymMatrix::from_fn(etas.dim(), |a, b| log_one_minus_probit(etas.get(a, b)));
    }

    /// Snapshot of the occupied clusters. Assumes canonical slot order, which
    /// holds after every sweep.
    pub fn draw(&self, iter: usize) -> Result<Draw> {
        let k_star = self.k_star();
        let occupied: Vec<usize> = (0..k_star).collect();
        let etas = eta_matrix(&self.kind, &self.state)?.select(&occupied);
        let stats = BlockStats {
            s: self.stats.s.select(&occupied),
            m: self.stats.m.select(&occupied),
        };
        let z = self.partition();
        debug_assert_eq!(z.labels(), &self.labels[..]);
        Ok(Draw {
            iter,
            k_star,
            labels: z,
            loglik: log_likelihood(&stats, &etas)?,
            eta_block: etas,
        })
    }
}

fn dm_alpha(prior: &ClusteringPrior) -> f64 {
    match prior {
        ClusteringPrior::Dm { alpha, .. } => *alpha,
        _ => unreachable!("DM only"),
    }
}

/// Parameters for `slots` clusters drawn from the hierarchical prior.
pub(crate) fn sample_state_from_prior<R: Rng + ?Sized>(
    kind: &ModelKind,
    cfg: &ChainConfig,
    slots: usize,
    rng: &mut R,
) -> ModelState {
    let h = &cfg.hyper;
    match kind {
        ModelKind::Cm => {
            let zeta = h.mu_zeta + h.s2_zeta.sqrt() * std_normal(rng);
            let tau2 = sample_inverse_gamma(rng, h.a_tau, h.b_tau);
            let mut eta_block = SymMatrix::filled(slots, 0.0);
            for a in 0..slots {
                for b in a..slots {
                    eta_block.set(a, b, zeta + tau2.sqrt() * std_normal(rng));
                }
            }
            ModelState::Cm(CmState {
                eta_block,
                zeta,
                tau2,
            })
        }
        ModelKind::Cdm { q } | ModelKind::Cbm { q } => {
            let sigma2 = sample_inverse_gamma(rng, h.a_sigma, h.b_sigma);
            let tau2 = if cfg.fixed_eta_variance {
                FIXED_ETA_VARIANCE
            } else {
                sample_inverse_gamma(rng, h.a_tau, h.b_tau)
            };
            let eta = tau2.sqrt() * std_normal(rng);
            let u = (0..slots)
                .map(|_| (0..*q).map(|_| sigma2.sqrt() * std_normal(rng)).collect())
                .collect();
            ModelState::Hybrid(HybridState {
                u,
                eta,
                sigma2,
                tau2,
            })
        }
    }
}

/// Log of a Dirichlet draw, via normalized gamma variates.
fn sample_log_dirichlet<R: Rng + ?Sized>(rng: &mut R, conc: &[f64]) -> Vec<f64> {
    let g: Vec<f64> = conc
        .iter()
        .map(|&a| {
            Gamma::new(a, 1.0)
                .expect("positive concentration")
                .sample(rng)
        })
        .collect();
    let total: f64 = g.iter().sum();
    g.iter().map(|x| x.ln() - total.ln()).collect()
}

/// Index drawn with probability proportional to `exp(w)`. `None` if every
/// weight is `-inf` or not finite.
pub(crate) fn sample_log_categorical<R: Rng + ?Sized>(
    rng: &mut R,
    log_w: impl Iterator<Item = f64> + Clone,
) -> Option<usize> {
    let max = log_w.clone().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return None;
    }
    let probs: Vec<f64> = log_w
        .map(|w| if w.is_nan() { 0.0 } else { (w - max).exp() })
        .collect();
    let total: f64 = probs.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (k, p) in probs.iter().enumerate() {
        if u < *p {
            return Some(k);
        }
        u -= p;
    }
    probs.iter().rposition(|&p| p > 0.0)
}
