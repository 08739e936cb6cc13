//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use itertools::Itertools;
use mean_partition::{canonicalize, Partition, PartitionMatrix};
use proptest::prelude::*;
use rand::Rng;

pub fn random_partition<R: Rng>(l: usize, m: usize, hard: bool, rng: &mut R) -> Partition {
    let matrix = if hard {
        PartitionMatrix::random_hard(l, m, rng)
    } else {
        PartitionMatrix::random_soft(l, m, rng)
    };
    canonicalize(&matrix)
}

/// Soft columns with a few exact zeros and ones mixed in.
pub fn arb_matrix(l: usize, m: usize) -> impl Strategy<Value = PartitionMatrix> {
    let column = prop_oneof![
        (0..l).prop_map(move |k| (0..l).map(|r| if r == k { 1.0 } else { 0.0 }).collect::<Vec<f64>>()),
        proptest::collection::vec(0.0f64..1.0, l).prop_map(|w| {
            let total: f64 = w.iter().sum();
            if total <= 0.0 {
                let mut c = vec![0.0; w.len()];
                c[0] = 1.0;
                c
            } else {
                w.iter().map(|v| v / total).collect()
            }
        }),
    ];
    proptest::collection::vec(column, m).prop_map(move |cols| {
        let mut rows = vec![vec![0.0; m]; l];
        for (j, col) in cols.iter().enumerate() {
            let mut sum = 0.0;
            for k in 0..l - 1 {
                rows[k][j] = col[k];
                sum += col[k];
            }
            rows[l - 1][j] = (1.0 - sum).max(0.0);
        }
        PartitionMatrix::validate(&rows).expect("generated columns are stochastic")
    })
}

pub fn arb_partition(l: usize, m: usize) -> impl Strategy<Value = Partition> {
    arb_matrix(l, m).prop_map(|x| canonicalize(&x))
}

pub fn arb_hard(l: usize, m: usize) -> impl Strategy<Value = Partition> {
    proptest::collection::vec(0..l, m).prop_map(move |labels| Partition::from_labels(&labels, l).unwrap())
}

/// Shape plus `count` partitions of that shape.
pub fn arb_partitions(count: usize, max_l: usize, max_m: usize) -> impl Strategy<Value = Vec<Partition>> {
    (2..=max_l, 2..=max_m).prop_flat_map(move |(l, m)| proptest::collection::vec(arb_partition(l, m), count))
}

pub fn arb_hard_partitions(count: usize, max_l: usize, max_m: usize) -> impl Strategy<Value = Vec<Partition>> {
    (2..=max_l, 2..=max_m).prop_flat_map(move |(l, m)| proptest::collection::vec(arb_hard(l, m), count))
}

/// Cluster index of every point of a hard partition, read off the matrix rows.
pub fn membership(x: &Partition) -> Vec<usize> {
    let c = x.canonical();
    (0..c.n_points())
        .map(|j| (0..c.n_clusters()).find(|&k| c.get(k, j) == 1.0).expect("hard column"))
        .collect()
}

/// `(m11, m10, m01, m00)` by walking all point pairs.
pub fn pair_counts(x: &Partition, y: &Partition) -> (f64, f64, f64, f64) {
    let (a, b) = (membership(x), membership(y));
    let mut counts = (0.0, 0.0, 0.0, 0.0);
    for (i, j) in (0..a.len()).tuple_combinations() {
        match (a[i] == a[j], b[i] == b[j]) {
            (true, true) => counts.0 += 1.0,
            (true, false) => counts.1 += 1.0,
            (false, true) => counts.2 += 1.0,
            (false, false) => counts.3 += 1.0,
        }
    }
    counts
}

/// Cluster sizes and intersection sizes from explicit point sets.
pub fn set_counts(x: &Partition, y: &Partition) -> (Vec<f64>, Vec<f64>, Vec<Vec<f64>>) {
    let sets = |p: &Partition| -> Vec<Vec<usize>> {
        p.canonical()
            .rows()
            .map(|row| (0..row.len()).filter(|&j| row[j] == 1.0).collect())
            .collect()
    };
    let (sx, sy) = (sets(x), sets(y));
    let xs = sx.iter().map(|s| s.len() as f64).collect();
    let ys = sy.iter().map(|s| s.len() as f64).collect();
    let z = sx
        .iter()
        .map(|a| sy.iter().map(|b| a.iter().filter(|j| b.contains(j)).count() as f64).collect())
        .collect();
    (xs, ys, z)
}

/// Maximum of `sum_k z[k][pi(k)]` over all permutations.
pub fn max_matching_brute(z: &[Vec<f64>]) -> f64 {
    let n = z.len();
    (0..n)
        .permutations(n)
        .map(|pi| (0..n).map(|k| z[k][pi[k]]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `delta_p` by enumerating every relabeling of `y`.
pub fn delta_brute(x: &Partition, y: &Partition, p: f64) -> f64 {
    let (a, b) = (x.canonical(), y.canonical());
    let l = a.n_clusters();
    (0..l)
        .permutations(l)
        .map(|pi| {
            (0..l)
                .map(|k| {
                    a.row(k)
                        .iter()
                        .zip(b.row(pi[k]))
                        .map(|(u, v)| (u - v).abs().powf(p))
                        .sum::<f64>()
                })
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
        .powf(1.0 / p)
}

/// Row-shuffled copy of `x`'s canonical matrix.
pub fn shuffled_rows<R: Rng>(x: &Partition, rng: &mut R) -> PartitionMatrix {
    let perm = mean_partition::Permutation::random(x.n_clusters(), rng);
    x.canonical().permute_rows(&perm)
}
