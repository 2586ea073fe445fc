//! Undirected binary networks, edge-list / dense CSV I/O and the descriptive
//! statistics used by posterior predictive checks.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// On-disk representation of a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum NetworkFormat {
    /// One whitespace-separated `i j` pair per line, 1-based.
    #[default]
    EdgeList,
    /// Comma-separated square 0/1 matrix.
    DenseMatrix,
}

impl std::str::FromStr for NetworkFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "edge-list" | "edgelist" | "edges" => Ok(Self::EdgeList),
            "dense-matrix" | "dense" | "matrix" | "csv" => Ok(Self::DenseMatrix),
            other => Err(Error::InvalidConfig(format!(
                "unknown network format `{other}`"
            ))),
        }
    }
}

/// Options for reading an edge list.
#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Node count. When absent the edge list must carry a `# n=<count>`
    /// line, otherwise the largest index seen is used.
    pub n: Option<usize>,
    /// Skip the first non-comment line.
    pub header: bool,
}

/// A simple undirected graph on nodes `0..n` without self-loops.
///
/// Immutable once built. Stores a dense adjacency bitmap for O(1) lookups and
/// sorted neighbour lists for traversal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    n: usize,
    adj: Vec<bool>,
    neighbors: Vec<Vec<usize>>,
    n_edges: usize,
}

impl Network {
    /// Builds a network from 0-based pairs. Duplicates are idempotent and the
    /// order within a pair is irrelevant.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n < 2 {
            return Err(Error::InvalidNetwork(format!(
                "need at least 2 nodes, got {n}"
            )));
        }
        let mut adj = vec![false; n * n];
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidNetwork(format!(
                    "edge ({}, {}) out of range for n = {n}",
                    i + 1,
                    j + 1
                )));
            }
            if i == j {
                return Err(Error::InvalidNetwork(format!(
                    "self-loop at node {}",
                    i + 1
                )));
            }
            adj[i * n + j] = true;
            adj[j * n + i] = true;
        }
        Ok(Self::from_adjacency(n, adj))
    }

    /// Builds from a symmetric row-major bitmap with a false diagonal.
    pub(crate) fn from_adjacency(n: usize, adj: Vec<bool>) -> Self {
        debug_assert_eq!(adj.len(), n * n);
        let neighbors: Vec<Vec<usize>> = (0..n)
            .map(|i| (0..n).filter(|&j| adj[i * n + j]).collect())
            .collect();
        let n_edges = neighbors.iter().map(Vec::len).sum::<usize>() / 2;
        Self {
            n,
            adj,
            neighbors,
            n_edges,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    /// Number of unordered node pairs, `n(n-1)/2`.
    pub fn n_pairs(&self) -> usize {
        self.n * (self.n - 1) / 2
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.n + j]
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    pub fn mean_degree(&self) -> f64 {
        2.0 * self.n_edges as f64 / self.n as f64
    }

    /// Edges as 0-based pairs with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.neighbors[i]
                .iter()
                .copied()
                .filter(move |&j| j > i)
                .map(move |j| (i, j))
        })
    }

    /// Relabels nodes: node `i` becomes `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::LengthMismatch {
                left: perm.len(),
                right: self.n,
            });
        }
        Self::from_edges(self.n, self.edges().map(|(i, j)| (perm[i], perm[j])))
    }

    pub fn to_edge_list_string(&self) -> String {
        let mut out = format!("# n={}\n", self.n);
        for (i, j) in self.edges() {
            let _ = writeln!(out, "{} {}", i + 1, j + 1);
        }
        out
    }

    pub fn to_dense_string(&self) -> String {
        let mut out = String::with_capacity(self.n * self.n * 2);
        for i in 0..self.n {
            for j in 0..self.n {
                if j > 0 {
                    out.push(',');
                }
                out.push(if self.has_edge(i, j) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>, format: NetworkFormat) -> Result<()> {
        let body = match format {
            NetworkFormat::EdgeList => self.to_edge_list_string(),
            NetworkFormat::DenseMatrix => self.to_dense_string(),
        };
        fs::write(path, body)?;
        Ok(())
    }
}

/// Reads a network from disk.
pub fn load_network(
    path: impl AsRef<Path>,
    format: NetworkFormat,
    opts: LoadOptions,
) -> Result<Network> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    match format {
        NetworkFormat::EdgeList => parse_edge_list(&text, path, opts),
        NetworkFormat::DenseMatrix => parse_dense(&text, path),
    }
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

pub(crate) fn parse_edge_list(text: &str, path: &Path, opts: LoadOptions) -> Result<Network> {
    let mut declared_n = None;
    let mut pairs = Vec::new();
    let mut header_pending = opts.header;
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(v) = comment.trim().strip_prefix("n=") {
                let v = v
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| parse_err(path, lineno, format!("bad node count `{v}`")))?;
                declared_n = Some(v);
            }
            continue;
        }
        if header_pending {
            header_pending = false;
            continue;
        }
        let mut fields = line.split_whitespace();
        let (a, b) = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(parse_err(
                    path,
                    lineno,
                    format!("expected `i j`, got `{line}`"),
                ))
            }
        };
        let parse_idx = |s: &str| -> Result<usize> {
            match s.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v),
                _ => Err(parse_err(path, lineno, format!("bad node index `{s}`"))),
            }
        };
        let (i, j) = (parse_idx(a)?, parse_idx(b)?);
        if i == j {
            return Err(parse_err(path, lineno, format!("self-loop `{i} {j}`")));
        }
        pairs.push((lineno, i, j));
    }
    let max_idx = pairs.iter().map(|&(_, i, j)| i.max(j)).max().unwrap_or(0);
    let n = opts.n.or(declared_n).unwrap_or(max_idx);
    if let Some(&(lineno, i, j)) = pairs.iter().find(|&&(_, i, j)| i.max(j) > n) {
        return Err(parse_err(
            path,
            lineno,
            format!("index out of range in `{i} {j}` (n = {n})"),
        ));
    }
    Network::from_edges(n, pairs.into_iter().map(|(_, i, j)| (i - 1, j - 1)))
}

pub(crate) fn parse_dense(text: &str, path: &Path) -> Result<Network> {
    let mut rows: Vec<Vec<bool>> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|cell| match cell.trim() {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(parse_err(
                    path,
                    lineno + 1,
                    format!("expected 0/1, got `{other}`"),
                )),
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if let Some((r, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != n) {
        return Err(parse_err(
            path,
            r + 1,
            format!(
                "matrix is not square: row has {} entries, expected {n}",
                row.len()
            ),
        ));
    }
    let mut adj = vec![false; n * n];
    for i in 0..n {
        if rows[i][i] {
            return Err(Error::InvalidNetwork(format!(
                "nonzero diagonal at node {}",
                i + 1
            )));
        }
        for j in 0..n {
            if rows[i][j] != rows[j][i] {
                return Err(Error::InvalidNetwork(format!(
                    "asymmetric entry at ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
            adj[i * n + j] = rows[i][j];
        }
    }
    if n < 2 {
        return Err(Error::InvalidNetwork(format!(
            "need at least 2 nodes, got {n}"
        )));
    }
    Ok(Network::from_adjacency(n, adj))
}

/// Summary statistics compared in posterior predictive checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkStats {
    pub density: f64,
    pub transitivity: f64,
    /// Degree assortativity; `None` when endpoint degree variance is zero.
    pub assortativity: Option<f64>,
    pub mean_degree: f64,
    pub sd_degree: f64,
    /// Mean geodesic over reachable ordered pairs; `None` if none reachable.
    pub mean_distance: Option<f64>,
}

/// Names of the statistics in [`NetworkStats`], in reporting order.
pub const STAT_NAMES: [&str; 6] = [
    "density",
    "transitivity",
    "assortativity",
    "mean_degree",
    "sd_degree",
    "mean_distance",
];

impl NetworkStats {
    /// Values in [`STAT_NAMES`] order; undefined statistics are `None`.
    pub fn values(&self) -> [Option<f64>; 6] {
        [
            Some(self.density),
            Some(self.transitivity),
            self.assortativity,
            Some(self.mean_degree),
            Some(self.sd_degree),
            self.mean_distance,
        ]
    }
}

pub fn network_stats(g: &Network) -> NetworkStats {
    let n = g.n();
    let degrees = g.degrees();
    let density = g.n_edges() as f64 / g.n_pairs() as f64;
    let mean_degree = density * (n - 1) as f64;

    let var_degree = degrees
        .iter()
        .map(|&d| (d as f64 - mean_degree).powi(2))
        .sum::<f64>()
        / n as f64;

    NetworkStats {
        density,
        transitivity: transitivity(g),
        assortativity: assortativity(g, &degrees),
        mean_degree,
        sd_degree: var_degree.max(0.0).sqrt(),
        mean_distance: mean_distance(g),
    }
}

fn transitivity(g: &Network) -> f64 {
    let mut triangles = 0u64;
    for i in 0..g.n() {
        for &j in g.neighbors(i).iter().filter(|&&j| j > i) {
            for &k in g.neighbors(j).iter().filter(|&&k| k > j) {
                if g.has_edge(i, k) {
                    triangles += 1;
                }
            }
        }
    }
    let triples: u64 = (0..g.n())
        .map(|i| {
            let d = g.degree(i) as u64;
            d * d.saturating_sub(1) / 2
        })
        .sum();
    if triples == 0 {
        0.0
    } else {
        3.0 * triangles as f64 / triples as f64
    }
}

fn assortativity(g: &Network, degrees: &[usize]) -> Option<f64> {
    let m = g.n_edges();
    if m == 0 {
        return None;
    }
    let (mut sum_prod, mut sum_half, mut sum_sq_half) = (0.0, 0.0, 0.0);
    for (i, j) in g.edges() {
        let (a, b) = (degrees[i] as f64, degrees[j] as f64);
        sum_prod += a * b;
        sum_half += 0.5 * (a + b);
        sum_sq_half += 0.5 * (a * a + b * b);
    }
    let m = m as f64;
    let mean = sum_half / m;
    let num = sum_prod / m - mean * mean;
    let den = sum_sq_half / m - mean * mean;
    if den.abs() <= 1e-12 * (sum_sq_half / m).max(1.0) {
        None
    } else {
        Some((num / den).clamp(-1.0, 1.0))
    }
}

fn mean_distance(g: &Network) -> Option<f64> {
    let n = g.n();
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::with_capacity(n);
    let (mut total, mut count) = (0u64, 0u64);
    for src in 0..n {
        dist.fill(usize::MAX);
        dist[src] = 0;
        queue.clear();
        queue.push_back(src);
        while let Some(v) = queue.pop_front() {
            let dv = dist[v];
            for &w in g.neighbors(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dv + 1;
                    total += (dv + 1) as u64;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
    }
    (count > 0).then(|| total as f64 / count as f64)
}
