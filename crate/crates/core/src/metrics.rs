//! Permutation-minimized `l_p` metrics on partitions.

use serde::Serialize;

use crate::align::optimal_alignment;
use crate::error::{Error, Result};
use crate::partition::{canonicalize, Partition, PartitionMatrix};

/// Order `p >= 1` of the entrywise matrix norm underlying `delta_p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricSpec {
    p: f64,
}

impl MetricSpec {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 || p.is_infinite() {
            return Err(Error::InvalidOrder(p));
        }
        Ok(Self { p })
    }

    pub const L1: MetricSpec = MetricSpec { p: 1.0 };
    pub const L2: MetricSpec = MetricSpec { p: 2.0 };

    pub fn p(&self) -> f64 {
        self.p
    }
}

/// `min_P ||X - P Y||_p` over all relabelings `P`.
pub fn delta_p(x: &Partition, y: &Partition, spec: MetricSpec) -> Result<f64> {
    let aligned = optimal_alignment(x, y, spec.p)?;
    Ok(root(aligned.objective, spec.p))
}

#[inline]
pub(crate) fn root(power_cost: f64, p: f64) -> f64 {
    let cost = power_cost.max(0.0);
    if p == 1.0 {
        cost
    } else if p == 2.0 {
        cost.sqrt()
    } else {
        cost.powf(1.0 / p)
    }
}

/// A `delta_2` midpoint: the average of `X` and the optimally relabeled `Y`.
pub fn midpoint(x: &Partition, y: &Partition) -> Result<Partition> {
    let aligned = optimal_alignment(x, y, 2.0)?;
    let xc = x.canonical();
    let yc = y.canonical().permute_rows(&aligned.permutation);
    let data = xc
        .as_slice()
        .iter()
        .zip(yc.as_slice())
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    let mid = PartitionMatrix::from_convex_unchecked(xc.n_clusters(), xc.n_points(), data);
    Ok(canonicalize(&mid))
}

/// One-sided set distance `sup_{X in U} inf_{Y in V} delta_p(X, Y)`.
pub fn set_distance(u: &[Partition], v: &[Partition], spec: MetricSpec) -> Result<f64> {
    if u.is_empty() || v.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut sup = 0.0_f64;
    for x in u {
        let mut inf = f64::INFINITY;
        for y in v {
            inf = inf.min(delta_p(x, y, spec)?);
        }
        sup = sup.max(inf);
    }
    Ok(sup)
}
