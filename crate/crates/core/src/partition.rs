//! Cluster assignments and the partition-comparison metrics used to score a
//! fit: variation of information, adjusted Rand index, pairwise FDR/FNR, the
//! min-mean-VI point estimate and the VI credible-ball radius.

use std::collections::HashMap;
use std::hash::Hash;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A partition of `n` items in canonical form.
///
/// Labels are stored 0-based and numbered by order of first appearance, so
/// label `k` is in use for every `k < k()`. All file formats use 1-based
/// labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition {
    labels: Vec<usize>,
    sizes: Vec<usize>,
}

impl Partition {
    /// Relabels by order of first appearance.
    pub fn canonicalize<T: Eq + Hash + Copy>(raw: &[T]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::InvalidPartition("empty label vector".into()));
        }
        let mut map: HashMap<T, usize> = HashMap::new();
        let mut sizes = Vec::new();
        let labels = raw
            .iter()
            .map(|x| {
                let next = map.len();
                let k = *map.entry(*x).or_insert(next);
                if k == sizes.len() {
                    sizes.push(0);
                }
                sizes[k] += 1;
                k
            })
            .collect();
        Ok(Self { labels, sizes })
    }

    /// Reads 1-based labels that are already canonical.
    pub fn from_one_based(labels: &[usize]) -> Result<Self> {
        if labels.contains(&0) {
            return Err(Error::InvalidPartition("labels must be 1-based".into()));
        }
        let p = Self::canonicalize(labels)?;
        if p.labels.iter().zip(labels).any(|(&a, &b)| a + 1 != b) {
            return Err(Error::InvalidPartition(
                "labels are not consecutive in order of first appearance".into(),
            ));
        }
        Ok(p)
    }

    /// All items in one cluster.
    pub fn single_cluster(n: usize) -> Self {
        Self {
            labels: vec![0; n],
            sizes: vec![n],
        }
    }

    /// Every item in its own cluster.
    pub fn singletons(n: usize) -> Self {
        Self {
            labels: (0..n).collect(),
            sizes: vec![1; n],
        }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Number of occupied clusters, `K*`.
    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    /// 0-based canonical labels.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.labels.iter().map(|k| k + 1).collect()
    }

    #[inline]
    pub fn co_clustered(&self, i: usize, j: usize) -> bool {
        self.labels[i] == self.labels[j]
    }

    pub fn co_clustering(&self) -> CoClusteringMatrix {
        let n = self.n();
        let mut entries = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = self.co_clustered(i, j);
            }
        }
        CoClusteringMatrix { n, entries }
    }

    /// Single-line CSV of 1-based labels.
    pub fn to_csv_line(&self) -> String {
        let cells: Vec<String> = self.one_based().iter().map(usize::to_string).collect();
        cells.join(",")
    }

    /// Parses a CSV line of labels; any integer labels are accepted and
    /// canonicalized.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let raw = text
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<i64>()
                    .map_err(|_| Error::InvalidPartition(format!("bad label `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::canonicalize(&raw)
    }
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = Error;

    fn try_from(one_based: Vec<usize>) -> Result<Self> {
        Self::from_one_based(&one_based)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.one_based()
    }
}

/// `n x n` co-clustering indicator matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoClusteringMatrix {
    n: usize,
    entries: Vec<bool>,
}

impl CoClusteringMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.entries[i * self.n + j]
    }
}

fn check_len(a: &Partition, b: &Partition) -> Result<()> {
    if a.n() != b.n() {
        return Err(Error::LengthMismatch {
            left: a.n(),
            right: b.n(),
        });
    }
    Ok(())
}

/// Dense contingency table, `a.k() x b.k()`.
fn contingency(a: &Partition, b: &Partition) -> Vec<Vec<usize>> {
    let mut table = vec![vec![0usize; b.k()]; a.k()];
    for (&x, &y) in a.labels.iter().zip(&b.labels) {
        table[x][y] += 1;
    }
    table
}

fn choose2(x: usize) -> f64 {
    (x * x.saturating_sub(1)) as f64 / 2.0
}

/// Variation of information in bits, `H(a) + H(b) - 2 I(a, b)`.
pub fn vi_distance(a: &Partition, b: &Partition) -> Result<f64> {
    check_len(a, b)?;
    let n = a.n() as f64;
    let table = contingency(a, b);
    // VI = sum_ij p_ij [log(p_i / p_ij) + log(p_j / p_ij)]
    let mut vi = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &nij) in row.iter().enumerate() {
            if nij == 0 {
                continue;
            }
            let nij = nij as f64;
            let ni = a.sizes[i] as f64;
            let nj = b.sizes[j] as f64;
            vi += nij / n * ((ni / nij).log2() + (nj / nij).log2());
        }
    }
    Ok(vi.max(0.0))
}

/// Adjusted Rand index from pair counts over the contingency table.
pub fn ari(a: &Partition, b: &Partition) -> Result<f64> {
    check_len(a, b)?;
    let table = contingency(a, b);
    let index: f64 = table.iter().flatten().map(|&x| choose2(x)).sum();
    let sum_a: f64 = a.sizes.iter().map(|&x| choose2(x)).sum();
    let sum_b: f64 = b.sizes.iter().map(|&x| choose2(x)).sum();
    let total = choose2(a.n());
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = sum_a * sum_b / total;
    let max = 0.5 * (sum_a + sum_b);
    if (max - expected).abs() < f64::EPSILON * max.max(1.0) {
        // both partitions trivial in the same way
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

/// Pairwise false discovery and false negative rates of `est` against
/// `truth`. Zero denominators give zero.
pub fn fdr_fnr(est: &Partition, truth: &Partition) -> Result<(f64, f64)> {
    check_len(est, truth)?;
    let table = contingency(est, truth);
    let both: f64 = table.iter().flatten().map(|&x| choose2(x)).sum();
    let est_pairs: f64 = est.sizes.iter().map(|&x| choose2(x)).sum();
    let truth_pairs: f64 = truth.sizes.iter().map(|&x| choose2(x)).sum();
    let fdr = if est_pairs > 0.0 {
        (est_pairs - both) / est_pairs
    } else {
        0.0
    };
    let fnr = if truth_pairs > 0.0 {
        (truth_pairs - both) / truth_pairs
    } else {
        0.0
    };
    Ok((fdr, fnr))
}

/// Collapses a sample list into distinct partitions with multiplicities,
/// keeping first-occurrence order.
fn distinct_with_counts(samples: &[Partition]) -> (Vec<&Partition>, Vec<usize>) {
    let mut index: HashMap<&[usize], usize> = HashMap::new();
    let mut uniq = Vec::new();
    let mut counts = Vec::new();
    for p in samples {
        match index.get(p.labels()) {
            Some(&u) => counts[u] += 1,
            None => {
                index.insert(p.labels(), uniq.len());
                uniq.push(p);
                counts.push(1);
            }
        }
    }
    (uniq, counts)
}

/// The sampled partition with the smallest mean VI to all samples. Ties go to
/// the first occurrence.
pub fn point_estimate(samples: &[Partition]) -> Result<Partition> {
    if samples.is_empty() {
        return Err(Error::Empty("point estimate needs at least one sample"));
    }
    let (uniq, counts) = distinct_with_counts(samples);
    let totals = uniq
        .par_iter()
        .map(|cand| {
            uniq.iter()
                .zip(&counts)
                .map(|(other, &c)| Ok(c as f64 * vi_distance(cand, other)?))
                .sum::<Result<f64>>()
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut best = (f64::INFINITY, 0usize);
    for (u, &total) in totals.iter().enumerate() {
        // strict comparison keeps the earliest candidate on ties
        if total < best.0 - 1e-12 * best.0.abs().max(1.0) || !best.0.is_finite() {
            best = (total, u);
        }
    }
    Ok(uniq[best.1].clone())
}

/// Smallest radius `r` such that at least `level` of the samples lie within
/// VI distance `r` of `center`.
pub fn credible_ball_radius(samples: &[Partition], center: &Partition, level: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Empty("credible ball needs at least one sample"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "credible level {level} not in (0,1)"
        )));
    }
    let mut d = samples
        .iter()
        .map(|s| vi_distance(s, center))
        .collect::<Result<Vec<_>>>()?;
    d.sort_by(f64::total_cmp);
    let needed = (level * d.len() as f64 - 1e-9).ceil().max(1.0) as usize;
    Ok(d[needed.min(d.len()) - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(labels: &[usize]) -> Partition {
        Partition::canonicalize(labels).unwrap()
    }

    #[test]
    fn canonicalize_first_appearance() {
        let z = p(&[7, 7, 2, 9]);
        assert_eq!(z.one_based(), vec![1, 1, 2, 3]);
        assert_eq!(z.sizes(), &[2, 1, 1]);
        let one = p(&[1, 1, 1]);
        assert_eq!(one.one_based(), vec![1, 1, 1]);
        assert_eq!(one.k(), 1);
        assert!(Partition::canonicalize::<usize>(&[]).is_err());
    }

    #[test]
    fn canonicalize_preserves_co_clustering() {
        let raw = [4usize, 1, 4, 3, 1, 0];
        let z = p(&raw);
        for i in 0..raw.len() {
            for j in 0..raw.len() {
                assert_eq!(z.co_clustering().get(i, j), raw[i] == raw[j]);
            }
        }
    }

    #[test]
    fn from_one_based_requires_canonical() {
        assert!(Partition::from_one_based(&[1, 2, 1]).is_ok());
        assert!(Partition::from_one_based(&[2, 1, 1]).is_err());
        assert!(Partition::from_one_based(&[1, 3]).is_err());
        assert!(Partition::from_one_based(&[0, 1]).is_err());
    }

    #[test]
    fn csv_line() {
        let z = Partition::parse_csv("3,3,1,2\n").unwrap();
        assert_eq!(z.to_csv_line(), "1,1,2,3");
    }

    #[test]
    fn vi_examples() {
        let a = p(&[1, 1, 2, 2]);
        let b = p(&[1, 2, 1, 2]);
        assert_eq!(vi_distance(&a, &a).unwrap(), 0.0);
        assert!((vi_distance(&a, &b).unwrap() - 2.0).abs() < 1e-12);
        assert!(vi_distance(&a, &p(&[1, 1, 1])).is_err());
    }

    #[test]
    fn ari_examples() {
        let a = p(&[1, 1, 2, 2]);
        let b = p(&[1, 2, 1, 2]);
        assert!((ari(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        assert!((ari(&a, &b).unwrap() + 0.5).abs() < 1e-12);
        let s = Partition::singletons(4);
        let one = Partition::single_cluster(4);
        assert_eq!(ari(&s, &one).unwrap(), 0.0);
    }

    #[test]
    fn fdr_fnr_examples() {
        let truth = p(&[1, 1, 2, 2]);
        assert_eq!(fdr_fnr(&truth, &truth).unwrap(), (0.0, 0.0));
        let (fdr, fnr) = fdr_fnr(&Partition::single_cluster(4), &truth).unwrap();
        assert!((fdr - 4.0 / 6.0).abs() < 1e-15);
        assert_eq!(fnr, 0.0);
        assert_eq!(
            fdr_fnr(&Partition::singletons(4), &truth).unwrap(),
            (0.0, 1.0)
        );
    }

    #[test]
    fn point_estimate_examples() {
        let z1 = p(&[1, 1, 2, 2]);
        let z2 = p(&[1, 2, 2, 2]);
        assert_eq!(point_estimate(&[z1.clone(), z1.clone()]).unwrap(), z1);
        let mut samples = vec![z1.clone(); 9];
        samples.push(z2);
        assert_eq!(point_estimate(&samples).unwrap(), z1);
        assert!(point_estimate(&[]).is_err());
    }

    #[test]
    fn point_estimate_tie_prefers_first() {
        let z1 = p(&[1, 1, 2]);
        let z2 = p(&[1, 2, 2]);
        assert_eq!(point_estimate(&[z2.clone(), z1.clone()]).unwrap(), z2);
        assert_eq!(point_estimate(&[z1.clone(), z2]).unwrap(), z1);
    }

    #[test]
    fn credible_ball_examples() {
        let c = p(&[1, 1, 2, 2]);
        // distances to the center are {0, 0, 0, d}
        let far = p(&[1, 2, 1, 2]);
        let d = vi_distance(&c, &far).unwrap();
        let samples = vec![c.clone(), c.clone(), c.clone(), far];
        assert_eq!(credible_ball_radius(&samples, &c, 0.75).unwrap(), 0.0);
        assert_eq!(credible_ball_radius(&samples, &c, 0.95).unwrap(), d);
        assert_eq!(
            credible_ball_radius(std::slice::from_ref(&c), &c, 0.5).unwrap(),
            0.0
        );
        assert!(credible_ball_radius(&[], &c, 0.95).is_err());
        assert!(credible_ball_radius(&samples, &c, 1.0).is_err());
    }

    #[test]
    fn serde_uses_one_based_labels() {
        let z = p(&[5, 5, 3]);
        let json = serde_json::to_string(&z).unwrap();
        assert_eq!(json, "[1,1,2]");
        let back: Partition = serde_json::from_str(&json).unwrap();
        assert_eq!(back, z);
    }
}
