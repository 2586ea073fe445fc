mod common;

use blockforge::blockmodels::{block_stats, log_likelihood, SymMatrix};
use blockforge::evaluation::predictive_metrics;
use blockforge::graph::network_stats;
use blockforge::partition::{ari, fdr_fnr, vi_distance};
use blockforge::priors::{log_partition_mass, prior_allocation};
use blockforge::{ClusteringPrior, Network, Partition};
use proptest::prelude::*;

fn labels(n: std::ops::RangeInclusive<usize>, k: usize) -> impl Strategy<Value = Vec<usize>> {
    n.prop_flat_map(move |n| prop::collection::vec(0..k, n))
}

fn pair(n: usize, k: usize) -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (
        prop::collection::vec(0..k, n),
        prop::collection::vec(0..k, n),
    )
}

fn network(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Network> {
    n.prop_flat_map(|n| {
        prop::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
            let mut edges = Vec::new();
            let mut b = bits.iter();
            for i in 0..n {
                for j in i + 1..n {
                    if *b.next().unwrap() {
                        edges.push((i, j));
                    }
                }
            }
            Network::from_edges(n, edges).unwrap()
        })
    })
}

fn p(x: &[usize]) -> Partition {
    Partition::canonicalize(x).unwrap()
}

proptest! {
    #[test]
    fn canonicalize_is_idempotent_and_csv_roundtrips(x in labels(1..=30, 6)) {
        let z = p(&x);
        prop_assert_eq!(p(z.labels()), z.clone());
        prop_assert_eq!(Partition::parse_csv(&z.to_csv_line()).unwrap(), z.clone());
        prop_assert_eq!(z.sizes().iter().sum::<usize>(), x.len());
        // same blocks
        for i in 0..x.len() {
            for j in 0..x.len() {
                prop_assert_eq!(x[i] == x[j], z.co_clustered(i, j));
            }
        }
    }

    #[test]
    fn vi_is_a_metric((x, y) in pair(12, 4), w in prop::collection::vec(0..4usize, 12)) {
        let (a, b, c) = (p(&x), p(&y), p(&w));
        let ab = vi_distance(&a, &b).unwrap();
        prop_assert!((ab - vi_distance(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!(vi_distance(&a, &a).unwrap().abs() < 1e-12);
        prop_assert!(ab <= vi_distance(&a, &c).unwrap() + vi_distance(&c, &b).unwrap() + 1e-12);
        prop_assert!(ab <= (12f64).log2() + 1e-12);
        prop_assert!(ab >= 0.0);
    }

    #[test]
    fn metrics_ignore_label_names((x, y) in pair(10, 5), shift in 1usize..5) {
        let relabel: Vec<usize> = x.iter().map(|c| (c + shift) * 7 % 11).collect();
        let (a, b, a2) = (p(&x), p(&y), p(&relabel));
        prop_assert!((vi_distance(&a, &b).unwrap() - vi_distance(&a2, &b).unwrap()).abs() < 1e-12);
        prop_assert!((ari(&a, &b).unwrap() - ari(&a2, &b).unwrap()).abs() < 1e-12);
        prop_assert_eq!(fdr_fnr(&a, &b).unwrap(), fdr_fnr(&a2, &b).unwrap());
    }

    #[test]
    fn ari_bounded_and_fdr_fnr_swap((x, y) in pair(10, 3)) {
        let (a, b) = (p(&x), p(&y));
        let r = ari(&a, &b).unwrap();
        prop_assert!(r <= 1.0 + 1e-12);
        prop_assert!((r - ari(&b, &a).unwrap()).abs() < 1e-12);
        let (fdr, fnr) = fdr_fnr(&a, &b).unwrap();
        let (fdr2, fnr2) = fdr_fnr(&b, &a).unwrap();
        prop_assert!((0.0..=1.0).contains(&fdr) && (0.0..=1.0).contains(&fnr));
        prop_assert!((fdr - fnr2).abs() < 1e-12 && (fnr - fdr2).abs() < 1e-12);
    }

    #[test]
    fn loglik_invariant_under_node_permutation(
        g in network(3..=10),
        seed in any::<u64>(),
    ) {
        use rand::{seq::SliceRandom, Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = g.n();
        let z: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
        let zp = p(&z);
        let eta = SymMatrix::from_fn(zp.k(), |_, _| rng.random_range(-2.0..2.0));
        let ll = log_likelihood(&block_stats(&g, &zp).unwrap(), &eta).unwrap();

        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let gp = g.permute(&perm).unwrap();
        let mut zperm = vec![0; n];
        for i in 0..n {
            zperm[perm[i]] = zp.label(i);
        }
        // keep the block indexing of `eta` by mapping labels back
        let mut order = Vec::new();
        for &c in &zperm {
            if !order.contains(&c) {
                order.push(c);
            }
        }
        let zc = p(&zperm);
        let eta_p = eta.select(&order);
        let llp = log_likelihood(&block_stats(&gp, &zc).unwrap(), &eta_p).unwrap();
        prop_assert!((ll - llp).abs() < 1e-9);

        let (s, sp) = (network_stats(&g), network_stats(&gp));
        prop_assert!((s.density - sp.density).abs() < 1e-12);
        prop_assert!((s.transitivity - sp.transitivity).abs() < 1e-12);
        prop_assert_eq!(s.mean_distance.map(|d| (d * 1e9).round()), sp.mean_distance.map(|d| (d * 1e9).round()));
    }

    #[test]
    fn auc_is_rank_based(g in network(4..=9), raw in prop::collection::vec(0.001f64..0.999, 81)) {
        let n = g.n();
        let mut probs = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                probs[i * n + j] = raw[i * 9 + j];
                probs[j * n + i] = raw[i * 9 + j];
            }
        }
        // strictly increasing map into (0, 1)
        let squashed: Vec<f64> = probs.iter().map(|&q| q * q * q).collect();
        let a = predictive_metrics(&probs, &g).unwrap().auc;
        let b = predictive_metrics(&squashed, &g).unwrap().auc;
        match (a, b) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12),
            (None, None) => {}
            _ => prop_assert!(false),
        }
    }

    #[test]
    fn nonparametric_masses_depend_only_on_sizes(x in labels(1..=9, 4), alpha in 0.1f64..5.0, sigma in 0.0f64..0.9, gamma in 0.05f64..0.95) {
        let z = p(&x);
        let mut sizes = z.sizes().to_vec();
        sizes.reverse();
        for prior in [
            ClusteringPrior::Dp { alpha },
            ClusteringPrior::Pyp { alpha, sigma },
            ClusteringPrior::Gnp { gamma },
            ClusteringPrior::Dm { alpha, k: 4 },
        ] {
            let a = log_partition_mass(&prior, z.sizes(), x.len()).unwrap();
            let b = log_partition_mass(&prior, &sizes, x.len()).unwrap();
            prop_assert!((a - b).abs() < 1e-10);
            prop_assert!(a <= 1e-12);
        }
    }

    #[test]
    fn allocation_weights_positive(counts in prop::collection::vec(1usize..20, 1..8), gamma in 0.01f64..0.99, sigma in 0.0f64..0.99) {
        let n: usize = counts.iter().sum();
        let k = counts.len();
        for prior in [ClusteringPrior::Gnp { gamma }, ClusteringPrior::Pyp { alpha: 1.0, sigma }] {
            let w = prior_allocation(&prior, &counts, n, k).unwrap();
            prop_assert!(w.existing.iter().all(|&x| x > 0.0));
            prop_assert!(w.new.unwrap() > 0.0);
            let norm = w.normalized();
            prop_assert!((norm.total() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn symmatrix_push_remove_select(dim in 1usize..7, extra in -5i64..5, k in 0usize..7) {
        let m = SymMatrix::from_fn(dim, |a, b| (a * 10 + b) as i64);
        let mut grown = m.clone();
        let row: Vec<i64> = (0..=dim).map(|l| extra + l as i64).collect();
        grown.push(&row);
        prop_assert_eq!(grown.dim(), dim + 1);
        for l in 0..=dim {
            prop_assert_eq!(grown.get(dim, l), row[l]);
            prop_assert_eq!(grown.get(l, dim), row[l]);
        }
        grown.remove(dim);
        prop_assert_eq!(&grown, &m);
        let k = k % dim;
        let mut order: Vec<usize> = (0..dim).collect();
        order.rotate_left(k);
        let s = m.select(&order);
        for a in 0..dim {
            for b in 0..dim {
                prop_assert_eq!(s.get(a, b), m.get(order[a], order[b]));
            }
        }
        prop_assert_eq!(SymMatrix::from_upper(&m.upper()).unwrap(), m);
    }
}
