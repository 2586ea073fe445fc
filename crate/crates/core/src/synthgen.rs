//! Planted-partition benchmark networks.
//!
//! Community sizes are drawn from a flat Dirichlet scaled to `n`, block
//! probabilities are drawn with replacement from a within-block pool and a
//! between-block pool, and edges are independent Bernoulli draws.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::blockmodels::SymMatrix;
use crate::error::{Error, Result};
use crate::graph::{Network, NetworkFormat};
use crate::partition::Partition;

/// Smallest admissible community.
pub const MIN_SIZE: usize = 2;
/// Size draws attempted before giving up on the plain Dirichlet law.
const MAX_RESAMPLES: usize = 10_000;

pub const WITHIN_POOL: [f64; 6] = [0.50, 0.52, 0.54, 0.56, 0.58, 0.60];
pub const BETWEEN_POOL: [f64; 6] = [0.10, 0.11, 0.12, 0.13, 0.14, 0.15];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub within_pool: Vec<f64>,
    pub between_pool: Vec<f64>,
    #[serde(default)]
    pub sizes: Option<Vec<usize>>,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioSpec {
    /// Scenario 1: 100 nodes, 5 communities.
    pub fn scenario1(seed: u64) -> Self {
        Self::planted(100, 5, seed)
    }

    /// Scenario 2: 200 nodes, 10 communities.
    pub fn scenario2(seed: u64) -> Self {
        Self::planted(200, 10, seed)
    }

    /// `preset` is 1 or 2.
    pub fn preset(preset: u32, seed: u64) -> Result<Self> {
        match preset {
            1 => Ok(Self::scenario1(seed)),
            2 => Ok(Self::scenario2(seed)),
            other => Err(Error::InvalidConfig(format!("unknown scenario {other}"))),
        }
    }

    /// Default pools with `n` nodes and `k` communities.
    pub fn planted(n: usize, k: usize, seed: u64) -> Self {
        Self {
            n,
            k,
            within_pool: WITHIN_POOL.to_vec(),
            between_pool: BETWEEN_POOL.to_vec(),
            sizes: None,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.k == 0 {
            return bad("K must be positive".into());
        }
        for (name, pool) in [
            ("within", &self.within_pool),
            ("between", &self.between_pool),
        ] {
            if pool.is_empty() {
                return bad(format!("{name}-block pool is empty"));
            }
            if let Some(p) = pool.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
                return bad(format!("{name}-block probability {p} outside (0, 1)"));
            }
        }
        match &self.sizes {
            Some(s) => {
                if s.len() != self.k {
                    return bad(format!("{} sizes given for K = {}", s.len(), self.k));
                }
                if s.contains(&0) || s.iter().sum::<usize>() != self.n {
                    return bad(format!("sizes must be positive and sum to n = {}", self.n));
                }
            }
            None => {
                if MIN_SIZE * self.k > self.n {
                    return bad(format!(
                        "cannot place {} communities of at least {MIN_SIZE} in {} nodes",
                        self.k, self.n
                    ));
                }
            }
        }
        Ok(())
    }
}

/// A generated benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct Synthetic {
    pub network: Network,
    pub truth: Partition,
    /// Edge probability for each pair of communities.
    pub blocks: SymMatrix<f64>,
}

impl Synthetic {
    /// Writes `network.txt`, `truth.csv` and `blocks.csv` into `dir`.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<[PathBuf; 3]> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let paths = [
            dir.join("network.txt"),
            dir.join("truth.csv"),
            dir.join("blocks.csv"),
        ];
        self.network.save(&paths[0], NetworkFormat::EdgeList)?;
        fs::write(&paths[1], self.truth.to_csv_line() + "\n")?;
        fs::write(&paths[2], blocks_csv(&self.blocks))?;
        Ok(paths)
    }
}

/// One row per community, comma separated.
pub fn blocks_csv(blocks: &SymMatrix<f64>) -> String {
    let mut out = String::new();
    for k in 0..blocks.dim() {
        let row: Vec<String> = blocks.row(k).iter().map(|p| p.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Draws community sizes, block probabilities and edges. Community `k`
/// occupies a contiguous run of node indices.
pub fn generate<R: Rng + ?Sized>(spec: &ScenarioSpec, rng: &mut R) -> Result<Synthetic> {
    spec.validate()?;
    let sizes = match &spec.sizes {
        Some(s) => s.clone(),
        None => dirichlet_sizes(spec.n, spec.k, rng),
    };
    let labels: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(k, &s)| std::iter::repeat_n(k, s))
        .collect();
    let truth = Partition::canonicalize(&labels)?;

    let mut blocks = SymMatrix::filled(spec.k, 0.0);
    for a in 0..spec.k {
        for b in a..spec.k {
            let pool = if a == b {
                &spec.within_pool
            } else {
                &spec.between_pool
            };
            blocks.set(a, b, *pool.choose(rng).expect("nonempty pool"));
        }
    }

    let n = spec.n;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < blocks.get(labels[i], labels[j]) {
                edges.push((i, j));
            }
        }
    }
    Ok(Synthetic {
        network: Network::from_edges(n, edges)?,
        truth,
        blocks,
    })
}

/// Flat-Dirichlet proportions times `n`, rounded by largest remainder,
/// redrawn until every community has at least [`MIN_SIZE`] nodes. If that
/// keeps failing, `MIN_SIZE` nodes go to each community and the rest are
/// split by one more Dirichlet draw.
pub fn dirichlet_sizes<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    for _ in 0..MAX_RESAMPLES {
        let s = rounded_dirichlet(n, k, rng);
        if s.iter().all(|&x| x >= MIN_SIZE) {
            return s;
        }
    }
    rounded_dirichlet(n - MIN_SIZE * k, k, rng)
        .into_iter()
        .map(|x| x + MIN_SIZE)
        .collect()
}

fn rounded_dirichlet<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    // Dirichlet(1, ..., 1) from normalized exponentials
    let g: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = g.iter().sum();
    let exact: Vec<f64> = g.iter().map(|x| x / total * n as f64).collect();
    let mut sizes: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let short = n - sizes.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &k in order.iter().take(short) {
        sizes[k] += 1;
    }
    sizes
}
