//! Optimal relabeling of one partition against another.
//!
//! Because a row permutation moves whole clusters, the entrywise `l_p` cost
//! `||X - P Y||_p^p` splits into a sum of row-to-row costs
//! `sum_k ||x_k - y_phi(k)||_p^p`. Minimizing over all relabelings is therefore
//! a linear assignment problem, solved exactly with a shortest augmenting path
//! Hungarian method. Among optimal assignments the lexicographically smallest
//! mapping is returned.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::partition::{has_perfect_matching, Partition, PartitionMatrix, Permutation};

/// Largest cluster count accepted by [`brute_force_alignment`].
pub const BRUTE_FORCE_LIMIT: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Square matrix of finite assignment costs.
#[derive(Clone, Debug, PartialEq)]
pub struct CostMatrix {
    size: usize,
    entries: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let size = rows.len();
        let mut entries = Vec::with_capacity(size * size);
        for row in rows {
            if row.len() != size {
                return Err(Error::NonSquareCost);
            }
            entries.extend_from_slice(row);
        }
        Self::from_row_major(size, entries)
    }

    pub fn from_row_major(size: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != size * size {
            return Err(Error::NonSquareCost);
        }
        if let Some(pos) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteCost {
                row: pos / size.max(1),
                column: pos % size.max(1),
            });
        }
        Ok(Self { size, entries })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, row: usize, column: usize) -> f64 {
        self.entries[row * self.size + column]
    }

    /// Sum of `cost[k][mapping[k]]`.
    pub fn evaluate(&self, perm: &Permutation) -> f64 {
        perm.mapping()
            .iter()
            .enumerate()
            .map(|(k, &col)| self.get(k, col))
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssignmentResult {
    /// Row `k` is assigned to column `permutation[k]`.
    pub permutation: Permutation,
    pub objective: f64,
}

/// Exact linear assignment. Ties resolve to the lexicographically smallest mapping.
pub fn solve_assignment(cost: &CostMatrix, sense: Sense) -> AssignmentResult {
    let n = cost.size();
    if n == 0 {
        return AssignmentResult {
            permutation: Permutation::identity(0),
            objective: 0.0,
        };
    }
    let signed = |i: usize, j: usize| match sense {
        Sense::Minimize => cost.get(i, j),
        Sense::Maximize => -cost.get(i, j),
    };
    let (u, v) = hungarian_potentials(n, &signed);

    let scale = cost.entries.iter().fold(1.0_f64, |acc, c| acc.max(c.abs()));
    let eps = 1e-11 * scale;
    let tight: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| signed(i, j) - u[i] - v[j] <= eps).collect())
        .collect();

    let mapping = lexicographic_matching(&tight);
    let permutation = Permutation::new(mapping).expect("matching is a bijection");
    let objective = cost.evaluate(&permutation);
    AssignmentResult {
        permutation,
        objective,
    }
}

/// Shortest augmenting path Hungarian method; returns optimal dual potentials
/// `(u, v)` with `cost(i, j) - u[i] - v[j] >= 0` and equality on an optimal matching.
fn hungarian_potentials(n: usize, cost: &dyn Fn(usize, usize) -> f64) -> (Vec<f64>, Vec<f64>) {
    // 1-based indexing with column 0 as the virtual source.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of_col = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        row_of_col[0] = i;
        let mut col0 = 0usize;
        let mut min_slack = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let row0 = row_of_col[col0];
            let mut delta = f64::INFINITY;
            let mut col1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost(row0 - 1, j - 1) - u[row0] - v[j];
                if reduced < min_slack[j] {
                    min_slack[j] = reduced;
                    way[j] = col0;
                }
                if min_slack[j] < delta {
                    delta = min_slack[j];
                    col1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            col0 = col1;
            if row_of_col[col0] == 0 {
                break;
            }
        }
        loop {
            let col1 = way[col0];
            row_of_col[col0] = row_of_col[col1];
            col0 = col1;
            if col0 == 0 {
                break;
            }
        }
    }
    (u[1..].to_vec(), v[1..].to_vec())
}

/// Lexicographically smallest perfect matching in a bipartite graph that has one.
fn lexicographic_matching(adjacent: &[Vec<bool>]) -> Vec<usize> {
    let n = adjacent.len();
    let mut mapping = Vec::with_capacity(n);
    let mut col_free = vec![true; n];
    for row in 0..n {
        let choice = (0..n)
            .find(|&col| {
                if !col_free[col] || !adjacent[row][col] {
                    return false;
                }
                let rest_cols: Vec<usize> = (0..n).filter(|&c| c != col && col_free[c]).collect();
                let sub: Vec<Vec<bool>> = (row + 1..n)
                    .map(|r| rest_cols.iter().map(|&c| adjacent[r][c]).collect())
                    .collect();
                has_perfect_matching(&sub)
            })
            .expect("tight graph of an optimal dual has a perfect matching");
        col_free[choice] = false;
        mapping.push(choice);
    }
    mapping
}

#[inline]
pub(crate) fn row_cost(a: &[f64], b: &[f64], p: f64) -> f64 {
    if p == 1.0 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
    } else if p == 2.0 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
    } else {
        a.iter().zip(b).map(|(x, y)| (x - y).abs().powf(p)).sum()
    }
}

fn check_order(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidOrder(p));
    }
    Ok(())
}

/// Row-to-row cost matrix `c[k][q] = ||reference_k - other_q||_p^p`.
pub fn alignment_costs(reference: &PartitionMatrix, other: &PartitionMatrix, p: f64) -> Result<CostMatrix> {
    reference.same_shape(other)?;
    check_order(p)?;
    let l = reference.n_clusters();
    let mut entries = Vec::with_capacity(l * l);
    for k in 0..l {
        for q in 0..l {
            entries.push(row_cost(reference.row(k), other.row(q), p));
        }
    }
    if entries.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidOrder(p));
    }
    CostMatrix::from_row_major(l, entries)
}

/// Aligns the rows of `other` to `reference`; `other.permute_rows(&result.permutation)`
/// is the closest representative. The objective is the `p`-th power cost.
pub fn align_matrices(reference: &PartitionMatrix, other: &PartitionMatrix, p: f64) -> Result<AssignmentResult> {
    let costs = alignment_costs(reference, other, p)?;
    Ok(solve_assignment(&costs, Sense::Minimize))
}

/// Optimal relabeling of `y` against `x`, computed on canonical representatives.
pub fn optimal_alignment(x: &Partition, y: &Partition, p: f64) -> Result<AssignmentResult> {
    align_matrices(x.canonical(), y.canonical(), p)
}

/// Exhaustive-enumeration counterpart of [`optimal_alignment`], for `l <= 8`.
pub fn brute_force_alignment(x: &Partition, y: &Partition, p: f64) -> Result<AssignmentResult> {
    x.same_shape(y)?;
    let l = x.n_clusters();
    if l > BRUTE_FORCE_LIMIT {
        return Err(Error::TooManyClusters {
            n_clusters: l,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let costs = alignment_costs(x.canonical(), y.canonical(), p)?;
    Ok(brute_force_assignment(&costs, Sense::Minimize))
}

/// Enumerates every permutation in lexicographic order and keeps the first optimum.
pub fn brute_force_assignment(cost: &CostMatrix, sense: Sense) -> AssignmentResult {
    let n = cost.size();
    let mut current: Vec<usize> = (0..n).collect();
    let mut best = current.clone();
    let mut best_value = cost.evaluate(&Permutation::new(current.clone()).expect("identity"));
    let better = |candidate: f64, incumbent: f64| match sense {
        Sense::Minimize => candidate < incumbent,
        Sense::Maximize => candidate > incumbent,
    };
    while next_permutation(&mut current) {
        let value: f64 = current.iter().enumerate().map(|(k, &c)| cost.get(k, c)).sum();
        if better(value, best_value) {
            best_value = value;
            best.clone_from(&current);
        }
    }
    AssignmentResult {
        permutation: Permutation::new(best).expect("enumerated permutation"),
        objective: best_value,
    }
}

fn next_permutation(items: &mut [usize]) -> bool {
    let n = items.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && items[i - 1] >= items[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while items[j] <= items[i - 1] {
        j -= 1;
    }
    items.swap(i - 1, j);
    items[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cost(rows: &[&[f64]]) -> CostMatrix {
        CostMatrix::new(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn example_pair() -> (Partition, Partition) {
        (
            Partition::from_rows(&[vec![1.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap(),
            Partition::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 1.0]]).unwrap(),
        )
    }

    #[test]
    fn solve_assignment_examples() {
        let r = solve_assignment(&cost(&[&[0.0, 1.0], &[1.0, 0.0]]), Sense::Minimize);
        assert_eq!(r.permutation.mapping(), &[0, 1]);
        assert_eq!(r.objective, 0.0);

        let r = solve_assignment(&cost(&[&[2.0, 1.0], &[1.0, 2.0]]), Sense::Minimize);
        assert_eq!(r.permutation.mapping(), &[1, 0]);
        assert_eq!(r.objective, 2.0);

        let r = solve_assignment(&cost(&[&[1.0, 1.0], &[1.0, 1.0]]), Sense::Minimize);
        assert_eq!(r.permutation.mapping(), &[0, 1]);
        assert_eq!(r.objective, 2.0);
    }

    #[test]
    fn maximize_uses_same_tie_break() {
        let r = solve_assignment(&cost(&[&[2.0, 1.0], &[1.0, 2.0]]), Sense::Maximize);
        assert_eq!(r.permutation.mapping(), &[0, 1]);
        assert_eq!(r.objective, 4.0);
        let r = solve_assignment(&cost(&[&[3.0, 3.0], &[3.0, 3.0]]), Sense::Maximize);
        assert_eq!(r.permutation.mapping(), &[0, 1]);
    }

    #[test]
    fn rejects_non_finite_and_ragged() {
        assert!(matches!(
            CostMatrix::new(&[vec![0.0, f64::NAN], vec![1.0, 0.0]]),
            Err(Error::NonFiniteCost { row: 0, column: 1 })
        ));
        assert_eq!(CostMatrix::new(&[vec![0.0, 1.0]]), Err(Error::NonSquareCost));
    }

    #[test]
    fn lexicographic_tie_break_matches_enumeration_on_integer_costs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        use rand::Rng;
        for _ in 0..300 {
            let n = rng.random_range(1..=6);
            let entries: Vec<f64> = (0..n * n).map(|_| rng.random_range(0..3) as f64).collect();
            let c = CostMatrix::from_row_major(n, entries).unwrap();
            let fast = solve_assignment(&c, Sense::Minimize);
            let slow = brute_force_assignment(&c, Sense::Minimize);
            assert_eq!(fast, slow);
        }
    }

    #[test]
    fn alignment_examples() {
        let (x, y) = example_pair();
        let r = optimal_alignment(&x, &x, 2.0).unwrap();
        assert!(r.permutation.is_identity());
        assert_eq!(r.objective, 0.0);

        let r1 = optimal_alignment(&x, &y, 1.0).unwrap();
        assert_eq!(r1.objective, 2.0);
        assert!(r1.permutation.is_identity());
        let r2 = optimal_alignment(&x, &y, 2.0).unwrap();
        assert_eq!(r2.objective, 2.0);

        assert!(matches!(optimal_alignment(&x, &y, 0.5), Err(Error::InvalidOrder(_))));
        let z = Partition::from_labels(&[0, 1], 2).unwrap();
        assert!(matches!(optimal_alignment(&x, &z, 2.0), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn brute_force_examples() {
        let x = Partition::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let r = brute_force_alignment(&x, &x, 3.0).unwrap();
        assert!(r.permutation.is_identity());
        assert_eq!(r.objective, 0.0);

        let big = Partition::from_labels(&(0..9).collect::<Vec<_>>(), 9).unwrap();
        assert!(matches!(
            brute_force_alignment(&big, &big, 2.0),
            Err(Error::TooManyClusters { n_clusters: 9, limit: 8 })
        ));
    }

    #[test]
    fn next_permutation_enumerates_factorial() {
        let mut items = vec![0, 1, 2, 3];
        let mut count = 1;
        while next_permutation(&mut items) {
            count += 1;
        }
        assert_eq!(count, 24);
    }
}
