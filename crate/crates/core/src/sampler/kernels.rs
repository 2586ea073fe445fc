//! Metropolis and conjugate Gibbs kernels for the continuous parameters.
//!
//! Each kernel exposes the quantity it samples from (a log target or the
//! parameters of the conditional) so tests can check it directly.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use super::Hyper;
use crate::blockmodels::{cell_log_likelihood, BlockStats, CmState, HybridState, ModelKind};

/// Accepted / proposed counts of a Metropolis kernel.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Acceptance {
    pub accepted: u64,
    pub proposed: u64,
}

impl Acceptance {
    pub fn rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    pub fn add(&mut self, other: Acceptance) {
        self.accepted += other.accepted;
        self.proposed += other.proposed;
    }
}

/// Draw from `InverseGamma(shape, rate)`.
pub fn sample_inverse_gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64, rate: f64) -> f64 {
    let g = Gamma::new(shape, 1.0 / rate).expect("positive gamma parameters");
    1.0 / g.sample(rng)
}

#[inline]
pub(crate) fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

#[inline]
fn metropolis_accept<R: Rng + ?Sized>(rng: &mut R, delta: f64) -> bool {
    delta >= 0.0 || rng.random::<f64>().ln() < delta
}

/// Full conditional of one block intercept, up to a constant.
#[inline]
pub fn eta_cell_log_target(s: u64, m: u64, eta: f64, zeta: f64, tau2: f64) -> f64 {
    cell_log_likelihood(s, m, eta) - (eta - zeta).powi(2) / (2.0 * tau2)
}

/// Random-walk Metropolis on every block intercept of the class model.
/// Blocks without pairs are still updated against their prior.
pub fn update_eta_block<R: Rng + ?Sized>(
    state: &mut CmState,
    stats: &BlockStats,
    rng: &mut R,
    step: f64,
) -> Acceptance {
    let mut acc = Acceptance::default();
    let k = state.eta_block.dim();
    for a in 0..k {
        for b in a..k {
            let (s, m) = (stats.s.get(a, b), stats.m.get(a, b));
            let cur = state.eta_block.get(a, b);
            let prop = cur + step * std_normal(rng);
            let delta = eta_cell_log_target(s, m, prop, state.zeta, state.tau2)
                - eta_cell_log_target(s, m, cur, state.zeta, state.tau2);
            acc.proposed += 1;
            if metropolis_accept(rng, delta) {
                state.eta_block.set(a, b, prop);
                acc.accepted += 1;
            }
        }
    }
    acc
}

/// Mean and variance of the Gaussian full conditional of `zeta`.
pub fn zeta_conditional(state: &CmState, hyper: &Hyper) -> (f64, f64) {
    let upper = state.eta_block.upper();
    let cells = upper.len() as f64;
    let v2 = 1.0 / (1.0 / hyper.s2_zeta + cells / state.tau2);
    let m = v2 * (hyper.mu_zeta / hyper.s2_zeta + upper.iter().sum::<f64>() / state.tau2);
    (m, v2)
}

pub fn update_zeta<R: Rng + ?Sized>(state: &mut CmState, hyper: &Hyper, rng: &mut R) {
    let (m, v2) = zeta_conditional(state, hyper);
    state.zeta = m + v2.sqrt() * std_normal(rng);
}

/// Shape and rate of the inverse-gamma full conditional of `tau2`.
pub fn tau2_cm_conditional(state: &CmState, hyper: &Hyper) -> (f64, f64) {
    let upper = state.eta_block.upper();
    let c = hyper.a_tau + 0.5 * upper.len() as f64;
    let d = hyper.b_tau + 0.5 * upper.iter().map(|e| (e - state.zeta).powi(2)).sum::<f64>();
    (c, d)
}

pub fn update_tau2_cm<R: Rng + ?Sized>(state: &mut CmState, hyper: &Hyper, rng: &mut R) {
    let (c, d) = tau2_cm_conditional(state, hyper);
    state.tau2 = sample_inverse_gamma(rng, c, d);
}

/// Log target of latent position `k` at value `u_k`: likelihood of every
/// block touching cluster `k` plus the Gaussian prior.
pub fn latent_log_target(
    state: &HybridState,
    kind: &ModelKind,
    stats: &BlockStats,
    k: usize,
    u_k: &[f64],
) -> f64 {
    let mut ll = 0.0;
    for l in 0..state.u.len() {
        let other = if l == k { u_k } else { &state.u[l] };
        let eta = kind.hybrid_eta(state.eta, u_k, other);
        ll += cell_log_likelihood(stats.s.get(k, l), stats.m.get(k, l), eta);
    }
    ll - u_k.iter().map(|x| x * x).sum::<f64>() / (2.0 * state.sigma2)
}

/// Spherical random-walk Metropolis on each latent position in turn.
pub fn update_latent_positions<R: Rng + ?Sized>(
    state: &mut HybridState,
    kind: &ModelKind,
    stats: &BlockStats,
    rng: &mut R,
    step: f64,
) -> Acceptance {
    let mut acc = Acceptance::default();
    let mut prop = Vec::new();
    for k in 0..state.u.len() {
        prop.clear();
        prop.extend(state.u[k].iter().map(|x| x + step * std_normal(rng)));
        let cur = state.u[k].clone();
        let delta = latent_log_target(state, kind, stats, k, &prop)
            - latent_log_target(state, kind, stats, k, &cur);
        acc.proposed += 1;
        if metropolis_accept(rng, delta) {
            state.u[k].copy_from_slice(&prop);
            acc.accepted += 1;
        }
    }
    acc
}

/// Log target of the global intercept with prior `N(0, prior_var)`.
pub fn global_eta_log_target(
    state: &HybridState,
    kind: &ModelKind,
    stats: &BlockStats,
    eta: f64,
    prior_var: f64,
) -> f64 {
    let k = state.u.len();
    let mut ll = 0.0;
    for a in 0..k {
        for b in a..k {
            let e = kind.hybrid_eta(eta, &state.u[a], &state.u[b]);
            ll += cell_log_likelihood(stats.s.get(a, b), stats.m.get(a, b), e);
        }
    }
    ll - eta * eta / (2.0 * prior_var)
}

pub fn update_global_eta<R: Rng + ?Sized>(
    state: &mut HybridState,
    kind: &ModelKind,
    stats: &BlockStats,
    prior_var: f64,
    rng: &mut R,
    step: f64,
) -> Acceptance {
    let cur = state.eta;
    let prop = cur + step * std_normal(rng);
    let delta = global_eta_log_target(state, kind, stats, prop, prior_var)
        - global_eta_log_target(state, kind, stats, cur, prior_var);
    let accepted = metropolis_accept(rng, delta);
    if accepted {
        state.eta = prop;
    }
    Acceptance {
        accepted: accepted as u64,
        proposed: 1,
    }
}

/// Shape and rate of the conditional of the latent-position variance.
pub fn sigma2_conditional(state: &HybridState, q: usize, hyper: &Hyper) -> (f64, f64) {
    let c = hyper.a_sigma + 0.5 * (state.u.len() * q) as f64;
    let d = hyper.b_sigma + 0.5 * state.u.iter().flatten().map(|x| x * x).sum::<f64>();
    (c, d)
}

pub fn update_sigma2<R: Rng + ?Sized>(
    state: &mut HybridState,
    q: usize,
    hyper: &Hyper,
    rng: &mut R,
) {
    let (c, d) = sigma2_conditional(state, q, hyper);
    state.sigma2 = sample_inverse_gamma(rng, c, d);
}

/// Shape and rate of the conditional of the prior variance of `eta`.
pub fn eta_variance_conditional(state: &HybridState, hyper: &Hyper) -> (f64, f64) {
    (hyper.a_tau + 0.5, hyper.b_tau + 0.5 * state.eta * state.eta)
}

pub fn update_eta_variance<R: Rng + ?Sized>(state: &mut HybridState, hyper: &Hyper, rng: &mut R) {
    let (c, d) = eta_variance_conditional(state, hyper);
    state.tau2 = sample_inverse_gamma(rng, c, d);
}
