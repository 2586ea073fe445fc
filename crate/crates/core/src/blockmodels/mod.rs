//! Block likelihood and the three parameterizations of the block
//! interaction matrix.
//!
//! * `CM`: every block `(k, l)` has a free intercept `eta_kl`.
//! * `CDM`: `eta_kl = eta - |u_k - u_l|` with cluster positions `u_k`.
//! * `CBM`: `eta_kl = eta + u_k . u_l`.
//!
//! Edge probabilities are `Phi(eta_kl)` for the block of the two endpoints.

mod probit;

use serde::{Deserialize, Serialize};

pub use probit::{log_one_minus_probit, log_probit, probit};

use crate::error::{Error, Result};
use crate::graph::Network;
use crate::partition::Partition;

/// Symmetric square matrix. Serializes as the row-major upper triangle
/// (diagonal included).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Copy> SymMatrix<T> {
    pub fn filled(dim: usize, value: T) -> Self {
        Self {
            dim,
            data: vec![value; dim * dim],
        }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data: Vec<Option<T>> = vec![None; dim * dim];
        // each upper-triangle entry is evaluated once, then mirrored
        for k in 0..dim {
            for l in k..dim {
                let v = f(k, l);
                data[k * dim + l] = Some(v);
                data[l * dim + k] = Some(v);
            }
        }
        Self {
            dim,
            data: data.into_iter().map(|v| v.expect("filled")).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, k: usize, l: usize) -> T {
        self.data[k * self.dim + l]
    }

    #[inline]
    pub fn set(&mut self, k: usize, l: usize, value: T) {
        self.data[k * self.dim + l] = value;
        self.data[l * self.dim + k] = value;
    }

    #[inline]
    pub fn update(&mut self, k: usize, l: usize, f: impl FnOnce(T) -> T) {
        let v = f(self.get(k, l));
        self.set(k, l, v);
    }

    /// Full row `k`.
    pub fn row(&self, k: usize) -> &[T] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    /// Appends index `dim`. `row` holds its entries against `0..dim`
    /// followed by the new diagonal entry.
    pub fn push(&mut self, row: &[T]) {
        assert_eq!(row.len(), self.dim + 1, "row length must be dim + 1");
        let d = self.dim + 1;
        let mut data = Vec::with_capacity(d * d);
        for k in 0..self.dim {
            data.extend_from_slice(self.row(k));
            data.push(row[k]);
        }
        data.extend_from_slice(row);
        self.dim = d;
        self.data = data;
    }

    /// Drops index `k`; later indices shift down by one.
    pub fn remove(&mut self, k: usize) {
        let keep: Vec<usize> = (0..self.dim).filter(|&i| i != k).collect();
        *self = self.select(&keep);
    }

    /// Sub-matrix on `order`: entry `(a, b)` is the old `(order[a], order[b])`.
    pub fn select(&self, order: &[usize]) -> Self {
        let d = order.len();
        let mut data = Vec::with_capacity(d * d);
        for &a in order {
            for &b in order {
                data.push(self.get(a, b));
            }
        }
        Self { dim: d, data }
    }

    /// Row-major upper triangle, `dim (dim + 1) / 2` entries.
    pub fn upper(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.dim * (self.dim + 1) / 2);
        for k in 0..self.dim {
            for l in k..self.dim {
                out.push(self.get(k, l));
            }
        }
        out
    }

    pub fn from_upper(upper: &[T]) -> Result<Self> {
        let len = upper.len();
        let dim = (((8 * len + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
        if dim * (dim + 1) / 2 != len || dim == 0 {
            return Err(Error::Dimension(format!(
                "{len} is not a triangular number"
            )));
        }
        let mut it = upper.iter().copied();
        let mut data = vec![upper[0]; dim * dim];
        for k in 0..dim {
            for l in k..dim {
                let v = it.next().expect("length checked");
                data[k * dim + l] = v;
                data[l * dim + k] = v;
            }
        }
        Ok(Self { dim, data })
    }
}

impl<T: Copy + Serialize> Serialize for SymMatrix<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.upper().serialize(s)
    }
}

impl<'de, T: Copy + Deserialize<'de>> Deserialize<'de> for SymMatrix<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let upper = Vec::<T>::deserialize(d)?;
        Self::from_upper(&upper).map_err(serde::de::Error::custom)
    }
}

/// Which parameterization of the block matrix is in use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelKind {
    Cm,
    Cdm {
        #[serde(rename = "Q")]
        q: usize,
    },
    Cbm {
        #[serde(rename = "Q")]
        q: usize,
    },
}

impl ModelKind {
    pub const DEFAULT_Q: usize = 4;

    pub fn parse(name: &str, q: usize) -> Result<Self> {
        let kind = match name.to_ascii_lowercase().as_str() {
            "cm" => ModelKind::Cm,
            "cdm" => ModelKind::Cdm { q },
            "cbm" => ModelKind::Cbm { q },
            other => return Err(Error::InvalidConfig(format!("unknown model `{other}`"))),
        };
        kind.validate()?;
        Ok(kind)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelKind::Cdm { q: 0 } | ModelKind::Cbm { q: 0 } => Err(Error::InvalidConfig(
                "latent dimension Q must be at least 1".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Cm => "cm",
            ModelKind::Cdm { .. } => "cdm",
            ModelKind::Cbm { .. } => "cbm",
        }
    }

    pub fn is_hybrid(&self) -> bool {
        !matches!(self, ModelKind::Cm)
    }

    pub fn latent_dim(&self) -> Option<usize> {
        match *self {
            ModelKind::Cm => None,
            ModelKind::Cdm { q } | ModelKind::Cbm { q } => Some(q),
        }
    }

    /// `eta + h(u_k, u_l)` for the hybrid models. Panics for `CM`.
    #[inline]
    pub fn hybrid_eta(&self, eta: f64, a: &[f64], b: &[f64]) -> f64 {
        match self {
            ModelKind::Cdm { .. } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                eta - d2.sqrt()
            }
            ModelKind::Cbm { .. } => eta + a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>(),
            ModelKind::Cm => panic!("hybrid_eta called for the class model"),
        }
    }
}

/// Parameters of the class model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmState {
    pub eta_block: SymMatrix<f64>,
    pub zeta: f64,
    pub tau2: f64,
}

/// Parameters of the class-distance and class-bilinear models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridState {
    /// One latent position per cluster, each of length `Q`.
    #[serde(rename = "U")]
    pub u: Vec<Vec<f64>>,
    pub eta: f64,
    pub sigma2: f64,
    /// Prior variance of `eta`.
    pub tau2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelState {
    Cm(CmState),
    Hybrid(HybridState),
}

impl ModelState {
    /// Number of clusters carrying parameters.
    pub fn k(&self) -> usize {
        match self {
            ModelState::Cm(s) => s.eta_block.dim(),
            ModelState::Hybrid(s) => s.u.len(),
        }
    }
}

/// Edge and pair counts per block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockStats {
    /// Edges observed in block `(k, l)`.
    pub s: SymMatrix<u64>,
    /// Node pairs in block `(k, l)`.
    pub m: SymMatrix<u64>,
}

impl BlockStats {
    pub fn dim(&self) -> usize {
        self.s.dim()
    }
}

pub fn block_stats(g: &Network, z: &Partition) -> Result<BlockStats> {
    if g.n() != z.n() {
        return Err(Error::LengthMismatch {
            left: g.n(),
            right: z.n(),
        });
    }
    Ok(block_stats_from_labels(g, z.labels(), z.k()))
}

/// Block counts for 0-based labels in `0..k`, empty labels allowed.
pub fn block_stats_from_labels(g: &Network, labels: &[usize], k: usize) -> BlockStats {
    let mut sizes = vec![0u64; k];
    for &c in labels {
        sizes[c] += 1;
    }
    let mut s = SymMatrix::filled(k, 0u64);
    let m = SymMatrix::from_fn(k, |a, b| {
        if a == b {
            sizes[a] * sizes[a].saturating_sub(1) / 2
        } else {
            sizes[a] * sizes[b]
        }
    });
    for (i, j) in g.edges() {
        s.update(labels[i], labels[j], |v| v + 1);
    }
    BlockStats { s, m }
}

/// Block interaction matrix implied by a state.
pub fn eta_matrix(kind: &ModelKind, state: &ModelState) -> Result<SymMatrix<f64>> {
    match (kind, state) {
        (ModelKind::Cm, ModelState::Cm(s)) => Ok(s.eta_block.clone()),
        (ModelKind::Cdm { q } | ModelKind::Cbm { q }, ModelState::Hybrid(s)) => {
            if let Some(row) = s.u.iter().find(|r| r.len() != *q) {
                return Err(Error::Dimension(format!(
                    "latent position of length {} for Q = {q}",
                    row.len()
                )));
            }
            Ok(SymMatrix::from_fn(s.u.len(), |a, b| {
                kind.hybrid_eta(s.eta, &s.u[a], &s.u[b])
            }))
        }
        _ => Err(Error::Dimension(format!(
            "state does not match model {}",
            kind.name()
        ))),
    }
}

/// `ln p(Y | eta, z)` summed over blocks.
pub fn log_likelihood(stats: &BlockStats, etas: &SymMatrix<f64>) -> Result<f64> {
    if stats.dim() != etas.dim() {
        return Err(Error::Dimension(format!(
            "block stats are {0}x{0}, eta is {1}x{1}",
            stats.dim(),
            etas.dim()
        )));
    }
    let mut total = 0.0;
    for k in 0..etas.dim() {
        for l in k..etas.dim() {
            total += cell_log_likelihood(stats.s.get(k, l), stats.m.get(k, l), etas.get(k, l));
        }
    }
    Ok(total)
}

/// Binomial kernel of one block; empty blocks contribute zero.
#[inline]
pub fn cell_log_likelihood(s: u64, m: u64, eta: f64) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let mut v = 0.0;
    if s > 0 {
        v += s as f64 * log_probit(eta);
    }
    if m > s {
        v += (m - s) as f64 * log_one_minus_probit(eta);
    }
    v
}

/// Row-major `n x n` edge probabilities `Phi(eta_{z_i z_j})`, diagonal zero.
pub fn edge_probs_from_etas(etas: &SymMatrix<f64>, z: &Partition) -> Result<Vec<f64>> {
    if z.k() > etas.dim() {
        return Err(Error::Dimension(format!(
            "partition has {} clusters, eta is {}x{}",
            z.k(),
            etas.dim(),
            etas.dim()
        )));
    }
    let n = z.n();
    let probs = SymMatrix::from_fn(etas.dim(), |a, b| probit(etas.get(a, b)));
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                p[i * n + j] = probs.get(z.label(i), z.label(j));
            }
        }
    }
    Ok(p)
}

pub fn edge_prob_matrix(kind: &ModelKind, state: &ModelState, z: &Partition) -> Result<Vec<f64>> {
    let etas = eta_matrix(kind, state)?;
    if etas.dim() != z.k() {
        return Err(Error::Dimension(format!(
            "state has {} clusters, partition has {}",
            etas.dim(),
            z.k()
        )));
    }
    edge_probs_from_etas(&etas, z)
}
