//! Bayesian community detection for undirected binary networks.
//!
//! The crate fits the standard stochastic block model (`CM`) and two hybrid
//! variants that embed clusters, not nodes, in a latent Euclidean space:
//! the class-distance model (`CDM`, `eta_kl = eta - |u_k - u_l|`) and the
//! class-bilinear model (`CBM`, `eta_kl = eta + u_k . u_l`). Edges are linked
//! to block parameters through the probit link. Cluster assignments are
//! sampled under one of four Gibbs-type priors: Dirichlet-multinomial,
//! Dirichlet process, Pitman-Yor process and Gnedin process.
//!
//! Module map:
//!
//! * [`graph`] network type, file I/O and descriptive statistics
//! * [`partition`] partitions and partition-comparison metrics
//! * [`priors`] allocation rules, partition masses and elicitation
//! * [`blockmodels`] likelihoods, probit link and parameterizations
//! * [`sampler`] Gibbs / Metropolis kernels and the chain driver
//! * [`evaluation`] fit reports, WAIC and posterior predictive checks
//! * [`synthgen`] planted-partition benchmark generator
//! * [`cli`] batch front end used by the `blockforge` binary

pub mod blockmodels;
pub mod cli;
pub mod error;
pub mod evaluation;
pub mod graph;
pub mod partition;
pub mod priors;
pub mod sampler;
pub mod synthgen;

pub use blockmodels::{BlockStats, CmState, HybridState, ModelKind, ModelState, SymMatrix};
pub use error::{Error, Result};
pub use graph::{Network, NetworkFormat, NetworkStats};
pub use partition::Partition;
pub use priors::{ClusteringPrior, PriorKind};
pub use sampler::{run_chain, Chain, ChainConfig, PosteriorSamples};
