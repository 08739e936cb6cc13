//! Soft extensions of the classical criteria for comparing partitions.
//!
//! Pair-counting criteria are built on the compatibility matrix
//! `C_X = X^T X`, whose entry `(r, s)` is the co-membership strength of
//! points `r` and `s`. The generalized confusion counts are inner products of
//! the strictly upper triangles of `C_X`, `1 - C_X`, `C_Y` and `1 - C_Y`.
//! Cluster-matching and information-theoretic criteria are built on the
//! cluster masses `x_p = <x_p, 1>`, `y_q = <y_q, 1>` and overlaps
//! `z_pq = <x_p, y_q>`. On hard partitions every quantity reduces to its
//! usual counting definition.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::align::{solve_assignment, CostMatrix, Sense};
use crate::error::{Error, Result};
use crate::partition::{Partition, PartitionMatrix};

/// Co-membership matrix `X^T X` of a partition, `m x m`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CompatibilityMatrix {
    size: usize,
    data: Vec<f64>,
}

impl CompatibilityMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, r: usize, s: usize) -> f64 {
        self.data[r * self.size + s]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks_exact(self.size).map(<[f64]>::to_vec).collect()
    }
}

/// `C_X = X^T X`. Independent of the chosen representative.
pub fn compatibility_matrix(x: &Partition) -> CompatibilityMatrix {
    compatibility_of(x.canonical())
}

fn compatibility_of(x: &PartitionMatrix) -> CompatibilityMatrix {
    let m = x.n_points();
    let mut data = vec![0.0; m * m];
    for r in 0..m {
        for s in r..m {
            let c: f64 = (0..x.n_clusters()).map(|k| x.get(k, r) * x.get(k, s)).sum();
            data[r * m + s] = c;
            data[s * m + r] = c;
        }
    }
    CompatibilityMatrix { size: m, data }
}

/// Inner product of the strictly upper triangles of two `m x m` matrices,
/// each entry optionally complemented (`1 - a`).
fn chi(a: &CompatibilityMatrix, a_complement: bool, b: &CompatibilityMatrix, b_complement: bool) -> f64 {
    let m = a.size();
    let mut total = 0.0;
    for r in 0..m {
        for s in r + 1..m {
            let av = if a_complement { 1.0 - a.get(r, s) } else { a.get(r, s) };
            let bv = if b_complement { 1.0 - b.get(r, s) } else { b.get(r, s) };
            total += av * bv;
        }
    }
    total
}

/// How the pair sums are computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Evaluation {
    /// Build both `m x m` compatibility matrices.
    #[default]
    Materialized,
    /// Use `sum_{r<s} c_rs d_rs = (||X Y^T||^2 - sum_r c_rr d_rr) / 2`; `O(l^2 m)` memory-free.
    Streaming,
}

/// Generalized 2x2 confusion quantities over the `N = m(m-1)/2` point pairs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConfusionCounts {
    pub m11: f64,
    pub m10: f64,
    pub m01: f64,
    pub m00: f64,
    pub n_pairs: f64,
}

impl ConfusionCounts {
    pub fn total(&self) -> f64 {
        self.m11 + self.m10 + self.m01 + self.m00
    }
}

/// Generalized confusion counts. The cluster counts of `x` and `y` may differ.
pub fn confusion(x: &Partition, y: &Partition) -> Result<ConfusionCounts> {
    confusion_with(x, y, Evaluation::Materialized)
}

pub fn confusion_with(x: &Partition, y: &Partition, evaluation: Evaluation) -> Result<ConfusionCounts> {
    confusion_of(x.canonical(), y.canonical(), evaluation)
}

pub(crate) fn confusion_of(
    x: &PartitionMatrix,
    y: &PartitionMatrix,
    evaluation: Evaluation,
) -> Result<ConfusionCounts> {
    let m = x.n_points();
    if m != y.n_points() {
        return Err(Error::PointCountMismatch {
            left: m,
            right: y.n_points(),
        });
    }
    if m < 2 {
        return Err(Error::SinglePoint);
    }
    let n_pairs = (m * (m - 1)) as f64 / 2.0;
    match evaluation {
        Evaluation::Materialized => {
            let cx = compatibility_of(x);
            let cy = compatibility_of(y);
            Ok(ConfusionCounts {
                m11: chi(&cx, false, &cy, false),
                m10: chi(&cx, false, &cy, true),
                m01: chi(&cx, true, &cy, false),
                m00: chi(&cx, true, &cy, true),
                n_pairs,
            })
        }
        Evaluation::Streaming => {
            let self_x: Vec<f64> = (0..m).map(|j| x.column(j).map(|v| v * v).sum()).collect();
            let self_y: Vec<f64> = (0..m).map(|j| y.column(j).map(|v| v * v).sum()).collect();
            let sq_mass = |p: &PartitionMatrix| -> f64 {
                p.rows().map(|row| row.iter().sum::<f64>().powi(2)).sum()
            };
            let mut cross = 0.0;
            for xr in x.rows() {
                for yr in y.rows() {
                    let z: f64 = xr.iter().zip(yr).map(|(a, b)| a * b).sum();
                    cross += z * z;
                }
            }
            let diag: f64 = self_x.iter().zip(&self_y).map(|(a, b)| a * b).sum();
            let upper_x = 0.5 * (sq_mass(x) - self_x.iter().sum::<f64>());
            let upper_y = 0.5 * (sq_mass(y) - self_y.iter().sum::<f64>());
            let m11 = (0.5 * (cross - diag)).max(0.0);
            let m10 = (upper_x - m11).max(0.0);
            let m01 = (upper_y - m11).max(0.0);
            let m00 = (n_pairs - upper_x - upper_y + m11).max(0.0);
            Ok(ConfusionCounts {
                m11,
                m10,
                m01,
                m00,
                n_pairs,
            })
        }
    }
}

/// Cluster masses and the overlap matrix `z_pq = <x_p, y_q>`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatchCounts {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<Vec<f64>>,
    pub m: usize,
}

pub fn match_counts(x: &Partition, y: &Partition) -> Result<MatchCounts> {
    x.same_shape(y)?;
    Ok(match_counts_of(x.canonical(), y.canonical()))
}

pub(crate) fn match_counts_of(x: &PartitionMatrix, y: &PartitionMatrix) -> MatchCounts {
    let mass = |p: &PartitionMatrix| -> Vec<f64> { p.rows().map(|r| r.iter().sum()).collect() };
    let z = x
        .rows()
        .map(|xr| {
            y.rows()
                .map(|yr| xr.iter().zip(yr).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();
    MatchCounts {
        x: mass(x),
        y: mass(y),
        z,
        m: x.n_points(),
    }
}

/// Normalizer inside the entropy terms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfoNormalizer {
    /// Divide masses by the number of points `m`; probabilities sum to one.
    #[default]
    Points,
    /// Divide masses by the number of pairs `m(m-1)/2`.
    Pairs,
}

/// Entropies and mutual information in nats.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InfoMeasures {
    pub h_x: f64,
    pub h_y: f64,
    pub h_joint: f64,
    pub h_x_given_y: f64,
    pub mutual_info: f64,
}

pub fn info_measures(x: &Partition, y: &Partition, normalizer: InfoNormalizer) -> Result<InfoMeasures> {
    x.same_shape(y)?;
    info_from_counts(&match_counts_of(x.canonical(), y.canonical()), normalizer)
}

fn info_from_counts(counts: &MatchCounts, normalizer: InfoNormalizer) -> Result<InfoMeasures> {
    let m = counts.m as f64;
    let norm = match normalizer {
        InfoNormalizer::Points => m,
        InfoNormalizer::Pairs => {
            if counts.m < 2 {
                return Err(Error::SinglePoint);
            }
            m * (m - 1.0) / 2.0
        }
    };
    // 0 log 0 = 0
    let plogp = |mass: f64| if mass > 0.0 { (mass / norm) * (mass / norm).ln() } else { 0.0 };
    let h_x = -counts.x.iter().map(|&v| plogp(v)).sum::<f64>();
    let h_y = -counts.y.iter().map(|&v| plogp(v)).sum::<f64>();
    let mut h_joint = 0.0;
    let mut h_x_given_y = 0.0;
    let mut mutual_info = 0.0;
    for (p, row) in counts.z.iter().enumerate() {
        for (q, &z) in row.iter().enumerate() {
            if z <= 0.0 {
                continue;
            }
            let pz = z / norm;
            h_joint -= pz * pz.ln();
            h_x_given_y -= pz * (z / counts.y[q]).ln();
            mutual_info += pz * (z * norm / (counts.x[p] * counts.y[q])).ln();
        }
    }
    Ok(InfoMeasures {
        h_x,
        h_y,
        h_joint,
        h_x_given_y,
        mutual_info,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Similarity,
    Dissimilarity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionKind {
    Wallace1,
    Wallace2,
    Rand,
    FowlkesMallows,
    Jaccard,
    Mirkin,
    MeilaHeckerman,
    VanDongen,
    MutualInfo,
    Nmi,
}

impl CriterionKind {
    pub const ALL: [CriterionKind; 10] = [
        CriterionKind::Wallace1,
        CriterionKind::Wallace2,
        CriterionKind::Rand,
        CriterionKind::FowlkesMallows,
        CriterionKind::Jaccard,
        CriterionKind::Mirkin,
        CriterionKind::MeilaHeckerman,
        CriterionKind::VanDongen,
        CriterionKind::MutualInfo,
        CriterionKind::Nmi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CriterionKind::Wallace1 => "wallace1",
            CriterionKind::Wallace2 => "wallace2",
            CriterionKind::Rand => "rand",
            CriterionKind::FowlkesMallows => "fowlkes_mallows",
            CriterionKind::Jaccard => "jaccard",
            CriterionKind::Mirkin => "mirkin",
            CriterionKind::MeilaHeckerman => "meila_heckerman",
            CriterionKind::VanDongen => "van_dongen",
            CriterionKind::MutualInfo => "mutual_info",
            CriterionKind::Nmi => "nmi",
        }
    }

    /// Native sense of the criterion.
    pub fn orientation(self) -> Orientation {
        match self {
            CriterionKind::Mirkin | CriterionKind::VanDongen => Orientation::Dissimilarity,
            _ => Orientation::Similarity,
        }
    }

    pub fn is_pair_counting(self) -> bool {
        matches!(
            self,
            CriterionKind::Wallace1
                | CriterionKind::Wallace2
                | CriterionKind::Rand
                | CriterionKind::FowlkesMallows
                | CriterionKind::Jaccard
        )
    }

    pub fn is_cluster_matching(self) -> bool {
        matches!(
            self,
            CriterionKind::Mirkin | CriterionKind::MeilaHeckerman | CriterionKind::VanDongen
        )
    }
}

impl fmt::Display for CriterionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CriterionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('-', "_");
        CriterionKind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown criterion `{s}`")))
    }
}

/// A criterion together with its orientation and entropy normalizer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CriterionSpec {
    kind: CriterionKind,
    orientation: Orientation,
    normalizer: InfoNormalizer,
}

impl CriterionSpec {
    pub fn new(kind: CriterionKind) -> Self {
        Self {
            kind,
            orientation: kind.orientation(),
            normalizer: InfoNormalizer::Points,
        }
    }

    pub fn with_normalizer(mut self, normalizer: InfoNormalizer) -> Self {
        self.normalizer = normalizer;
        self
    }

    pub fn kind(&self) -> CriterionKind {
        self.kind
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn normalizer(&self) -> InfoNormalizer {
        self.normalizer
    }
}

fn ratio(numerator: f64, denominator: f64, criterion: &'static str) -> Result<f64> {
    if denominator <= 0.0 {
        return Err(Error::DegeneratePartition { criterion });
    }
    Ok(numerator / denominator)
}

/// Pair-counting index computed from confusion counts.
pub fn pair_index(kind: CriterionKind, c: &ConfusionCounts) -> Result<f64> {
    let name = kind.name();
    match kind {
        CriterionKind::Wallace1 => ratio(c.m11, c.m11 + c.m01, name),
        CriterionKind::Wallace2 => ratio(c.m11, c.m11 + c.m10, name),
        CriterionKind::Rand => ratio(c.m11 + c.m00, c.n_pairs, name),
        CriterionKind::FowlkesMallows => {
            ratio(c.m11, ((c.m11 + c.m10) * (c.m11 + c.m01)).sqrt(), name)
        }
        CriterionKind::Jaccard => ratio(c.m11, c.m11 + c.m10 + c.m01, name),
        other => Err(Error::InvalidParameter(format!(
            "{other} is not a pair-counting criterion"
        ))),
    }
}

pub fn pair_criterion(x: &Partition, y: &Partition, kind: CriterionKind) -> Result<f64> {
    if !kind.is_pair_counting() {
        return Err(Error::InvalidParameter(format!(
            "{kind} is not a pair-counting criterion"
        )));
    }
    pair_index(kind, &confusion(x, y)?)
}

/// Cluster-matching criterion computed from match counts.
pub fn match_index(kind: CriterionKind, c: &MatchCounts) -> Result<f64> {
    let sq = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>();
    match kind {
        CriterionKind::Mirkin => {
            let overlap: f64 = c.z.iter().map(|row| sq(row)).sum();
            Ok(sq(&c.x) + sq(&c.y) - 2.0 * overlap)
        }
        CriterionKind::MeilaHeckerman => {
            let cost = CostMatrix::new(&c.z)?;
            let best = solve_assignment(&cost, Sense::Maximize);
            Ok(best.objective / c.m as f64)
        }
        CriterionKind::VanDongen => {
            let l = c.z.len();
            let row_max: f64 = c
                .z
                .iter()
                .map(|row| row.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
                .sum();
            let col_max: f64 = (0..l)
                .map(|q| c.z.iter().map(|row| row[q]).fold(f64::NEG_INFINITY, f64::max))
                .sum();
            Ok(2.0 * c.m as f64 - row_max - col_max)
        }
        other => Err(Error::InvalidParameter(format!(
            "{other} is not a cluster-matching criterion"
        ))),
    }
}

pub fn match_criterion(x: &Partition, y: &Partition, kind: CriterionKind) -> Result<f64> {
    match_index(kind, &match_counts(x, y)?)
}

/// Native value of any criterion.
pub fn evaluate(x: &Partition, y: &Partition, spec: &CriterionSpec) -> Result<f64> {
    evaluate_matrices(x.canonical(), y.canonical(), spec)
}

pub(crate) fn evaluate_matrices(x: &PartitionMatrix, y: &PartitionMatrix, spec: &CriterionSpec) -> Result<f64> {
    let kind = spec.kind;
    if kind.is_pair_counting() {
        return pair_index(kind, &confusion_of(x, y, Evaluation::Materialized)?);
    }
    x.same_shape(y)?;
    let counts = match_counts_of(x, y);
    if kind.is_cluster_matching() {
        return match_index(kind, &counts);
    }
    let info = info_from_counts(&counts, spec.normalizer)?;
    match kind {
        CriterionKind::MutualInfo => Ok(info.mutual_info),
        CriterionKind::Nmi => ratio(info.mutual_info, (info.h_x * info.h_y).sqrt(), "nmi"),
        _ => unreachable!("all criterion families handled"),
    }
}

/// The criterion as a dissimilarity: similarities are negated.
pub fn dissimilarity(x: &Partition, y: &Partition, spec: &CriterionSpec) -> Result<f64> {
    dissimilarity_matrices(x.canonical(), y.canonical(), spec)
}

pub(crate) fn dissimilarity_matrices(
    x: &PartitionMatrix,
    y: &PartitionMatrix,
    spec: &CriterionSpec,
) -> Result<f64> {
    let value = evaluate_matrices(x, y, spec)?;
    Ok(match spec.orientation {
        Orientation::Similarity => -value,
        Orientation::Dissimilarity => value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_pair() -> (Partition, Partition) {
        (
            Partition::from_rows(&[vec![1.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap(),
            Partition::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 1.0]]).unwrap(),
        )
    }

    fn uniform(m: usize) -> Partition {
        Partition::from_rows(&[vec![0.5; m], vec![0.5; m]]).unwrap()
    }

    #[test]
    fn compatibility_examples() {
        let (x, _) = example_pair();
        assert_eq!(
            compatibility_matrix(&x).to_rows(),
            vec![vec![1.0, 1.0, 0.0], vec![1.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]
        );
        let c = compatibility_matrix(&uniform(2));
        assert!(c.to_rows().iter().flatten().all(|&v| v == 0.5));
    }

    #[test]
    fn confusion_examples() {
        let (x, y) = example_pair();
        let c = confusion(&x, &y).unwrap();
        assert_eq!((c.m11, c.m10, c.m01, c.m00, c.n_pairs), (0.0, 1.0, 1.0, 1.0, 3.0));

        let c = confusion(&x, &x).unwrap();
        assert_eq!((c.m11, c.m10, c.m01, c.m00), (1.0, 0.0, 0.0, 2.0));

        let u = uniform(2);
        let c = confusion(&u, &u).unwrap();
        assert!((c.m11 - 0.25).abs() < 1e-15);
        assert!((c.total() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn confusion_errors() {
        let (x, _) = example_pair();
        let one = Partition::from_labels(&[0], 2).unwrap();
        assert_eq!(confusion(&one, &one), Err(Error::SinglePoint));
        let four = Partition::from_labels(&[0, 1, 0, 1], 2).unwrap();
        assert!(matches!(confusion(&x, &four), Err(Error::PointCountMismatch { .. })));
    }

    #[test]
    fn confusion_accepts_different_cluster_counts() {
        let x = Partition::from_labels(&[0, 0, 1, 1], 2).unwrap();
        let y = Partition::from_labels(&[0, 0, 1, 2], 3).unwrap();
        let c = confusion(&x, &y).unwrap();
        assert_eq!((c.m11, c.m10, c.m01, c.m00), (1.0, 1.0, 0.0, 4.0));
    }

    #[test]
    fn pair_criterion_examples() {
        let (x, y) = example_pair();
        assert_eq!(pair_criterion(&x, &x, CriterionKind::Rand).unwrap(), 1.0);
        assert_eq!(pair_criterion(&x, &x, CriterionKind::Jaccard).unwrap(), 1.0);
        assert!((pair_criterion(&x, &y, CriterionKind::Rand).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(pair_criterion(&x, &y, CriterionKind::Jaccard).unwrap(), 0.0);
    }

    #[test]
    fn wallace_indices_condition_on_different_partitions() {
        let x = Partition::from_labels(&[0, 0, 0, 1], 2).unwrap();
        let y = Partition::from_labels(&[0, 0, 1, 1], 2).unwrap();
        // m11 = 1, m10 = 2, m01 = 1
        let w1 = pair_criterion(&x, &y, CriterionKind::Wallace1).unwrap();
        let w2 = pair_criterion(&x, &y, CriterionKind::Wallace2).unwrap();
        assert!((w1 - 0.5).abs() < 1e-15);
        assert!((w2 - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_denominators_are_errors() {
        let singletons = Partition::from_labels(&[0, 1, 2], 3).unwrap();
        assert_eq!(
            pair_criterion(&singletons, &singletons, CriterionKind::Jaccard),
            Err(Error::DegeneratePartition { criterion: "jaccard" })
        );
        assert!(pair_criterion(&singletons, &singletons, CriterionKind::Rand).is_ok());
        assert!(matches!(
            pair_criterion(&singletons, &singletons, CriterionKind::Mirkin),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn match_count_examples() {
        let (x, y) = example_pair();
        let c = match_counts(&x, &y).unwrap();
        assert_eq!(c.x, vec![2.0, 1.0]);
        assert_eq!(c.y, vec![1.0, 2.0]);
        assert_eq!(c.z, vec![vec![1.0, 1.0], vec![0.0, 1.0]]);

        let c = match_counts(&x, &x).unwrap();
        for p in 0..2 {
            assert_eq!(c.z[p][p], c.x[p]);
        }

        let u = uniform(4);
        let c = match_counts(&u, &u).unwrap();
        assert_eq!(c.x, vec![2.0, 2.0]);
        assert!(c.z.iter().flatten().all(|&v| v == 1.0));
    }

    #[test]
    fn match_criterion_examples() {
        let (x, y) = example_pair();
        assert_eq!(match_criterion(&x, &x, CriterionKind::Mirkin).unwrap(), 0.0);
        assert_eq!(match_criterion(&x, &y, CriterionKind::Mirkin).unwrap(), 4.0);
        let mh = match_criterion(&x, &y, CriterionKind::MeilaHeckerman).unwrap();
        assert!((mh - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(match_criterion(&x, &y, CriterionKind::VanDongen).unwrap(), 2.0);
        let z = Partition::from_labels(&[0, 1, 2], 3).unwrap();
        assert!(matches!(
            match_criterion(&x, &z, CriterionKind::Mirkin),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn info_examples() {
        let (x, y) = example_pair();
        let info = info_measures(&x, &x, InfoNormalizer::Points).unwrap();
        let expected_h = -(2.0_f64 / 3.0) * (2.0_f64 / 3.0).ln() - (1.0_f64 / 3.0) * (1.0_f64 / 3.0).ln();
        assert!((info.h_x - expected_h).abs() < 1e-12);
        assert!((info.h_x - 0.636514168).abs() < 1e-9);
        assert!((info.mutual_info - info.h_x).abs() < 1e-9);

        let info = info_measures(&x, &y, InfoNormalizer::Points).unwrap();
        let expected_i = (2.0 * 1.5_f64.ln() + 0.75_f64.ln()) / 3.0;
        assert!((info.mutual_info - expected_i).abs() < 1e-12);
        assert!((info.mutual_info - 0.174416).abs() < 1e-6);
    }

    #[test]
    fn pair_normalizer_reproduces_printed_formulas() {
        let (x, y) = example_pair();
        let info = info_measures(&x, &y, InfoNormalizer::Pairs).unwrap();
        // N = 3 = m here, so both normalizers coincide.
        let pts = info_measures(&x, &y, InfoNormalizer::Points).unwrap();
        assert!((info.mutual_info - pts.mutual_info).abs() < 1e-12);

        let a = Partition::from_labels(&[0, 0, 1, 1], 2).unwrap();
        let info = info_measures(&a, &a, InfoNormalizer::Pairs).unwrap();
        // masses 2, 2 over N = 6
        let expected = -2.0 * (2.0 / 6.0) * (2.0_f64 / 6.0).ln();
        assert!((info.h_x - expected).abs() < 1e-12);
    }

    #[test]
    fn dissimilarity_examples() {
        let (x, y) = example_pair();
        let rand = CriterionSpec::new(CriterionKind::Rand);
        assert_eq!(dissimilarity(&x, &x, &rand).unwrap(), -1.0);
        assert!((dissimilarity(&x, &y, &rand).unwrap() + 1.0 / 3.0).abs() < 1e-15);
        let mirkin = CriterionSpec::new(CriterionKind::Mirkin);
        assert_eq!(dissimilarity(&x, &y, &mirkin).unwrap(), 4.0);
    }

    #[test]
    fn nmi_is_one_on_identical_non_trivial_partitions() {
        let x = Partition::from_labels(&[0, 0, 1, 2, 2], 3).unwrap();
        let nmi = evaluate(&x, &x, &CriterionSpec::new(CriterionKind::Nmi)).unwrap();
        assert!((nmi - 1.0).abs() < 1e-12);
        let trivial = Partition::from_labels(&[0, 0, 0, 0, 0], 3).unwrap();
        assert!(matches!(
            evaluate(&trivial, &x, &CriterionSpec::new(CriterionKind::Nmi)),
            Err(Error::DegeneratePartition { .. })
        ));
    }

    #[test]
    fn criterion_names_round_trip() {
        for kind in CriterionKind::ALL {
            assert_eq!(kind.name().parse::<CriterionKind>().unwrap(), kind);
        }
        assert_eq!("Fowlkes-Mallows".parse::<CriterionKind>().unwrap(), CriterionKind::FowlkesMallows);
        assert!("ari".parse::<CriterionKind>().is_err());
    }

    #[test]
    fn streaming_matches_materialized() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let a = crate::canonicalize(&PartitionMatrix::random_soft(3, 7, &mut rng));
            let b = crate::canonicalize(&PartitionMatrix::random_soft(4, 7, &mut rng));
            let full = confusion_with(&a, &b, Evaluation::Materialized).unwrap();
            let lean = confusion_with(&a, &b, Evaluation::Streaming).unwrap();
            for (u, v) in [
                (full.m11, lean.m11),
                (full.m10, lean.m10),
                (full.m01, lean.m01),
                (full.m00, lean.m00),
            ] {
                assert!((u - v).abs() < 1e-9);
            }
        }
    }
}
