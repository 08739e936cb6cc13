//! Partition matrices and their orbits under cluster relabeling.
//!
//! A [`PartitionMatrix`] is one labeling of a partition: an `l x m` matrix with
//! entries in `[0, 1]` whose columns sum to one. Row `k` is cluster `k`, column
//! `j` is the membership vector of point `j`. Relabeling the clusters permutes
//! the rows, so a partition is an orbit of matrices under row permutations.
//! [`Partition`] stores that orbit through a canonical representative whose
//! rows are sorted in non-increasing lexicographic order.

use std::cmp::Ordering;
use std::fmt;

use rand::Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Tolerance for exact-algebra checks (validation, equality, hardness).
pub const TOL: f64 = 1e-12;

/// An `l x m` membership matrix with unit column sums, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionMatrix {
    n_clusters: usize,
    n_points: usize,
    data: Vec<f64>,
}

impl PartitionMatrix {
    /// Validates a matrix given as a list of cluster rows.
    pub fn validate(rows: &[Vec<f64>]) -> Result<Self> {
        let n_clusters = rows.len();
        if n_clusters == 0 {
            return Err(Error::EmptyInput);
        }
        let n_points = rows[0].len();
        let mut data = Vec::with_capacity(n_clusters * n_points);
        for (k, row) in rows.iter().enumerate() {
            if row.len() != n_points {
                return Err(Error::RaggedRows {
                    row: k,
                    found: row.len(),
                    expected: n_points,
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(n_clusters, n_points, data)
    }

    /// Validates a row-major buffer of `n_clusters * n_points` entries.
    pub fn from_row_major(n_clusters: usize, n_points: usize, data: Vec<f64>) -> Result<Self> {
        if n_clusters == 0 || n_points == 0 {
            return Err(Error::EmptyInput);
        }
        if data.len() != n_clusters * n_points {
            return Err(Error::Parse(format!(
                "expected {} entries for a {}x{} matrix, found {}",
                n_clusters * n_points,
                n_clusters,
                n_points,
                data.len()
            )));
        }
        for k in 0..n_clusters {
            for j in 0..n_points {
                let value = data[k * n_points + j];
                if !(0.0..=1.0).contains(&value) {
                    return Err(Error::EntryOutOfRange {
                        row: k,
                        column: j,
                        value,
                    });
                }
            }
        }
        for j in 0..n_points {
            let sum: f64 = (0..n_clusters).map(|k| data[k * n_points + j]).sum();
            if (sum - 1.0).abs() > TOL {
                return Err(Error::ColumnSumViolation { column: j, sum });
            }
        }
        Ok(Self {
            n_clusters,
            n_points,
            data,
        })
    }

    /// Indicator matrix of a hard labeling: column `j` is the basis vector `e_{labels[j]}`.
    pub fn from_labels(labels: &[usize], n_clusters: usize) -> Result<Self> {
        if labels.is_empty() || n_clusters == 0 {
            return Err(Error::EmptyInput);
        }
        let n_points = labels.len();
        let mut data = vec![0.0; n_clusters * n_points];
        for (j, &label) in labels.iter().enumerate() {
            if label >= n_clusters {
                return Err(Error::LabelOutOfRange {
                    point: j,
                    label,
                    n_clusters,
                });
            }
            data[label * n_points + j] = 1.0;
        }
        Ok(Self {
            n_clusters,
            n_points,
            data,
        })
    }

    /// Builds a matrix known to be valid up to rounding, e.g. a convex
    /// combination of valid matrices. Entries are clamped to `[0, 1]`.
    pub(crate) fn from_convex_unchecked(n_clusters: usize, n_points: usize, mut data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), n_clusters * n_points);
        for v in &mut data {
            *v = v.clamp(0.0, 1.0);
        }
        Self {
            n_clusters,
            n_points,
            data,
        }
    }

    /// Uniformly random hard partition with at most `n_clusters` clusters.
    pub fn random_hard<R: Rng + ?Sized>(n_clusters: usize, n_points: usize, rng: &mut R) -> Self {
        let labels: Vec<usize> = (0..n_points).map(|_| rng.random_range(0..n_clusters)).collect();
        Self::from_labels(&labels, n_clusters).expect("labels drawn in range")
    }

    /// Random soft partition; each column is a normalized vector of exponential draws.
    pub fn random_soft<R: Rng + ?Sized>(n_clusters: usize, n_points: usize, rng: &mut R) -> Self {
        let mut data = vec![0.0; n_clusters * n_points];
        for j in 0..n_points {
            let draws: Vec<f64> = (0..n_clusters)
                .map(|_| -(1.0 - rng.random::<f64>()).ln())
                .collect();
            let total: f64 = draws.iter().sum();
            for (k, d) in draws.iter().enumerate() {
                data[k * n_points + j] = d / total;
            }
        }
        Self::from_convex_unchecked(n_clusters, n_points, data)
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    #[inline]
    pub fn get(&self, cluster: usize, point: usize) -> f64 {
        self.data[cluster * self.n_points + point]
    }

    #[inline]
    pub fn row(&self, cluster: usize) -> &[f64] {
        &self.data[cluster * self.n_points..(cluster + 1) * self.n_points]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.n_points)
    }

    pub fn column(&self, point: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_clusters).map(move |k| self.get(k, point))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// True iff every entry is within [`TOL`] of 0 or 1.
    pub fn is_hard(&self) -> bool {
        self.data
            .iter()
            .all(|&v| v.abs() <= TOL || (v - 1.0).abs() <= TOL)
    }

    /// Per-column argmax; ties go to the lowest cluster index.
    pub fn labels(&self) -> Vec<usize> {
        (0..self.n_points)
            .map(|j| {
                let mut best = 0;
                for k in 1..self.n_clusters {
                    if self.get(k, j) > self.get(best, j) {
                        best = k;
                    }
                }
                best
            })
            .collect()
    }

    /// Rounds to the hard partition given by [`labels`](Self::labels).
    pub fn harden(&self) -> Self {
        Self::from_labels(&self.labels(), self.n_clusters).expect("argmax labels are in range")
    }

    /// Row `k` of the result is row `perm[k]` of `self`.
    pub fn permute_rows(&self, perm: &Permutation) -> Self {
        assert_eq!(perm.len(), self.n_clusters, "permutation size must match cluster count");
        let mut data = Vec::with_capacity(self.data.len());
        for &src in perm.mapping() {
            data.extend_from_slice(self.row(src));
        }
        Self {
            n_clusters: self.n_clusters,
            n_points: self.n_points,
            data,
        }
    }

    pub fn same_shape(&self, other: &Self) -> Result<()> {
        if self.n_clusters != other.n_clusters || self.n_points != other.n_points {
            return Err(Error::ShapeMismatch {
                left_clusters: self.n_clusters,
                left_points: self.n_points,
                right_clusters: other.n_clusters,
                right_points: other.n_points,
            });
        }
        Ok(())
    }

    /// Lexicographic comparison of the row-major buffers.
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        lex_cmp_slices(&self.data, &other.data)
    }
}

impl Serialize for PartitionMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("PartitionMatrix", 3)?;
        s.serialize_field("l", &self.n_clusters)?;
        s.serialize_field("m", &self.n_points)?;
        s.serialize_field("rows", &self.to_rows())?;
        s.end()
    }
}

impl fmt::Display for PartitionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.4}")).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

fn lex_cmp_slices(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

/// A bijection on cluster indices. Output row `k` takes input row `mapping[k]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(size: usize) -> Self {
        Self((0..size).collect())
    }

    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; mapping.len()];
        for &target in &mapping {
            if target >= mapping.len() || seen[target] {
                return Err(Error::InvalidParameter(format!(
                    "{mapping:?} is not a permutation"
                )));
            }
            seen[target] = true;
        }
        Ok(Self(mapping))
    }

    pub fn mapping(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(k, &v)| k == v)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (k, &v) in self.0.iter().enumerate() {
            inv[v] = k;
        }
        Self(inv)
    }

    /// Uniformly random permutation (Fisher-Yates).
    pub fn random<R: Rng + ?Sized>(size: usize, rng: &mut R) -> Self {
        let mut mapping: Vec<usize> = (0..size).collect();
        for i in (1..size).rev() {
            let j = rng.random_range(0..=i);
            mapping.swap(i, j);
        }
        Self(mapping)
    }
}

/// A partition, i.e. the orbit of a membership matrix under row permutations.
#[derive(Clone, Debug)]
pub struct Partition {
    canonical: PartitionMatrix,
    hard: bool,
}

/// Projects a matrix onto its orbit by sorting its rows in non-increasing
/// lexicographic order. Equal rows keep their original relative order.
pub fn canonicalize(matrix: &PartitionMatrix) -> Partition {
    let mut order: Vec<usize> = (0..matrix.n_clusters()).collect();
    order.sort_by(|&a, &b| lex_cmp_slices(matrix.row(b), matrix.row(a)));
    let canonical = matrix.permute_rows(&Permutation(order));
    let hard = canonical.is_hard();
    Partition { canonical, hard }
}

impl Partition {
    pub fn from_labels(labels: &[usize], n_clusters: usize) -> Result<Self> {
        PartitionMatrix::from_labels(labels, n_clusters).map(|m| canonicalize(&m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        PartitionMatrix::validate(rows).map(|m| canonicalize(&m))
    }

    pub fn canonical(&self) -> &PartitionMatrix {
        &self.canonical
    }

    pub fn into_canonical(self) -> PartitionMatrix {
        self.canonical
    }

    pub fn is_hard(&self) -> bool {
        self.hard
    }

    pub fn n_clusters(&self) -> usize {
        self.canonical.n_clusters()
    }

    pub fn n_points(&self) -> usize {
        self.canonical.n_points()
    }

    pub fn same_shape(&self, other: &Self) -> Result<()> {
        self.canonical.same_shape(&other.canonical)
    }

    /// True iff some row permutation maps one representative onto the other
    /// entrywise within [`TOL`].
    pub fn orbit_equal(&self, other: &Self) -> Result<bool> {
        self.same_shape(other)?;
        let (a, b) = (&self.canonical, &other.canonical);
        if a.as_slice()
            .iter()
            .zip(b.as_slice())
            .all(|(x, y)| (x - y).abs() <= TOL)
        {
            return Ok(true);
        }
        // Near-equal rows can sort differently; fall back to a perfect
        // matching on the "rows agree within TOL" relation.
        let l = a.n_clusters();
        let close: Vec<Vec<bool>> = (0..l)
            .map(|k| {
                (0..l)
                    .map(|q| a.row(k).iter().zip(b.row(q)).all(|(x, y)| (x - y).abs() <= TOL))
                    .collect()
            })
            .collect();
        Ok(has_perfect_matching(&close))
    }
}

impl PartialEq for Partition {
    fn eq(&self, other: &Self) -> bool {
        self.orbit_equal(other).unwrap_or(false)
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.canonical.serialize(serializer)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.canonical.fmt(f)
    }
}

/// Kuhn's augmenting-path bipartite matching on a square adjacency matrix.
pub(crate) fn has_perfect_matching(adjacent: &[Vec<bool>]) -> bool {
    let n = adjacent.len();
    let mut match_right: Vec<Option<usize>> = vec![None; n];
    for left in 0..n {
        let mut visited = vec![false; n];
        if !augment(left, adjacent, &mut visited, &mut match_right) {
            return false;
        }
    }
    true
}

fn augment(
    left: usize,
    adjacent: &[Vec<bool>],
    visited: &mut [bool],
    match_right: &mut [Option<usize>],
) -> bool {
    for right in 0..adjacent.len() {
        if adjacent[left][right] && !visited[right] {
            visited[right] = true;
            let free = match match_right[right] {
                None => true,
                Some(other) => augment(other, adjacent, visited, match_right),
            };
            if free {
                match_right[right] = Some(left);
                return true;
            }
        }
    }
    false
}
