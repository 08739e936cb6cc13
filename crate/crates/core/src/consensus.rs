//! Frechet mean partitions.
//!
//! The Frechet function of a sample `X_1..X_n` is
//! `F_n(Z) = (1/n) sum_i rho(X_i, Z)`; its minimizers are mean partitions and
//! its infimum is the sample variation. For `rho = delta_2^2` the minimizer is
//! found by alternating optimal relabeling of every member against the current
//! estimate with averaging of the relabeled members; the averaging step is
//! exact for fixed relabelings and the relabeling step is exact for a fixed
//! estimate, so the objective never increases. Generic criteria are handled
//! by local search over hard partitions, with an exhaustive enumerator for
//! small instances.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::align::align_matrices;
use crate::criteria::{dissimilarity_matrices, CriterionSpec};
use crate::error::{Error, Result};
use crate::metrics::{root, MetricSpec};
use crate::partition::{canonicalize, Partition, PartitionMatrix, Permutation};
use crate::seeding::rng_for;

/// Non-empty list of partitions sharing `l` and `m`.
#[derive(Clone, Debug)]
pub struct Sample {
    members: Vec<Partition>,
}

impl Sample {
    pub fn new(members: Vec<Partition>) -> Result<Self> {
        let first = members.first().ok_or(Error::EmptySample)?;
        for other in &members[1..] {
            first.same_shape(other)?;
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[Partition] {
        &self.members
    }

    pub fn into_members(self) -> Vec<Partition> {
        self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn n_clusters(&self) -> usize {
        self.members[0].n_clusters()
    }

    pub fn n_points(&self) -> usize {
        self.members[0].n_points()
    }
}

/// The dissimilarity behind a Frechet function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Dissimilarity {
    Metric(MetricSpec),
    Criterion(CriterionSpec),
}

/// `rho = delta_p^q` for metrics, or a criterion in dissimilarity orientation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FrechetSpec {
    rho: Dissimilarity,
    loss_exponent: f64,
}

impl FrechetSpec {
    /// `delta_2^2`, the mean-partition consensus function.
    pub fn l2_squared() -> Self {
        Self {
            rho: Dissimilarity::Metric(MetricSpec::L2),
            loss_exponent: 2.0,
        }
    }

    pub fn metric(metric: MetricSpec, loss_exponent: f64) -> Result<Self> {
        if loss_exponent.is_nan() || loss_exponent < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "loss exponent {loss_exponent} must be >= 1"
            )));
        }
        Ok(Self {
            rho: Dissimilarity::Metric(metric),
            loss_exponent,
        })
    }

    pub fn criterion(criterion: CriterionSpec) -> Self {
        Self {
            rho: Dissimilarity::Criterion(criterion),
            loss_exponent: 1.0,
        }
    }

    pub fn rho(&self) -> &Dissimilarity {
        &self.rho
    }

    pub fn loss_exponent(&self) -> f64 {
        self.loss_exponent
    }

    pub fn is_l2_squared(&self) -> bool {
        matches!(self.rho, Dissimilarity::Metric(m) if m.p() == 2.0) && self.loss_exponent == 2.0
    }

    /// `rho(member, candidate)` on raw representatives.
    pub(crate) fn eval(&self, member: &PartitionMatrix, candidate: &PartitionMatrix) -> Result<f64> {
        match self.rho {
            Dissimilarity::Metric(metric) => {
                let p = metric.p();
                let cost = align_matrices(candidate, member, p)?.objective;
                if p == self.loss_exponent {
                    return Ok(cost.max(0.0));
                }
                let dist = root(cost, p);
                Ok(if self.loss_exponent == 1.0 { dist } else { dist.powf(self.loss_exponent) })
            }
            Dissimilarity::Criterion(spec) => dissimilarity_matrices(member, candidate, &spec),
        }
    }
}

fn frechet_of(sample: &Sample, candidate: &PartitionMatrix, spec: &FrechetSpec) -> Result<f64> {
    let mut total = 0.0;
    for x in sample.members() {
        total += spec.eval(x.canonical(), candidate)?;
    }
    Ok(total / sample.len() as f64)
}

/// `F_n(Z) = (1/n) sum_i rho(X_i, Z)`.
pub fn frechet_value(sample: &Sample, z: &Partition, spec: &FrechetSpec) -> Result<f64> {
    sample.members()[0].same_shape(z)?;
    frechet_of(sample, z.canonical(), spec)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HardenedMean {
    pub mean: Partition,
    pub variation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsensusResult {
    pub mean: Partition,
    /// Frechet value attained by `mean`.
    pub variation: f64,
    /// Relabeling of each member's canonical form onto the canonical mean
    /// (`delta_2` solver only).
    pub alignments: Vec<Permutation>,
    /// Frechet value after every iteration of the winning restart.
    pub trace: Vec<f64>,
    pub restarts_used: usize,
    pub converged: bool,
    /// Restarts that reached the same value (within 1e-9) at a different partition.
    pub alternative_optima: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hardened: Option<HardenedMean>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MmOptions {
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
    /// Members scored by `F_n` when picking member initializers; larger
    /// samples are subsampled.
    pub candidate_limit: usize,
    pub harden: bool,
}

impl Default for MmOptions {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iter: 100,
            tol: 1e-9,
            seed: 0,
            candidate_limit: 32,
            harden: false,
        }
    }
}

struct Run {
    mean: PartitionMatrix,
    value: f64,
    trace: Vec<f64>,
    converged: bool,
}

/// Relabels every member against `z`; returns `F_n(z)` and the relabelings.
fn align_sample(sample: &Sample, z: &PartitionMatrix) -> (f64, Vec<Permutation>) {
    let aligned: Vec<_> = sample
        .members()
        .iter()
        .map(|x| align_matrices(z, x.canonical(), 2.0).expect("sample shapes validated"))
        .collect();
    let total: f64 = aligned.iter().map(|a| a.objective).sum();
    let perms = aligned.into_iter().map(|a| a.permutation).collect();
    (total / sample.len() as f64, perms)
}

fn average_aligned(sample: &Sample, perms: &[Permutation]) -> PartitionMatrix {
    let (l, m) = (sample.n_clusters(), sample.n_points());
    let mut data = vec![0.0; l * m];
    for (x, perm) in sample.members().iter().zip(perms) {
        let x = x.canonical();
        for (k, &src) in perm.mapping().iter().enumerate() {
            for (acc, v) in data[k * m..(k + 1) * m].iter_mut().zip(x.row(src)) {
                *acc += v;
            }
        }
    }
    let n = sample.len() as f64;
    data.iter_mut().for_each(|v| *v /= n);
    PartitionMatrix::from_convex_unchecked(l, m, data)
}

fn run_mm(sample: &Sample, init: PartitionMatrix, opts: &MmOptions) -> Run {
    let mut z = init;
    let (mut value, mut perms) = align_sample(sample, &z);
    let mut trace = vec![value];
    let mut converged = false;
    for _ in 0..opts.max_iter {
        let next = average_aligned(sample, &perms);
        let (next_value, next_perms) = align_sample(sample, &next);
        trace.push(next_value);
        let stalled = value - next_value < opts.tol || next_perms == perms;
        z = next;
        value = next_value;
        perms = next_perms;
        if stalled {
            converged = true;
            break;
        }
    }
    Run {
        mean: z,
        value,
        trace,
        converged,
    }
}

/// Orders runs by value, then by canonical matrix, so merging is schedule independent.
fn better(a: &(Partition, f64), b: &(Partition, f64)) -> Ordering {
    a.1.total_cmp(&b.1)
        .then_with(|| a.0.canonical().lex_cmp(b.0.canonical()))
}

fn merge_runs(runs: Vec<Run>) -> (Partition, Run, usize) {
    let scored: Vec<(Partition, f64)> = runs.iter().map(|r| (canonicalize(&r.mean), r.value)).collect();
    let best_idx = (0..runs.len())
        .min_by(|&a, &b| better(&scored[a], &scored[b]))
        .expect("at least one run");
    let (best_mean, best_value) = scored[best_idx].clone();
    let alternatives = scored
        .iter()
        .filter(|(mean, value)| (value - best_value).abs() <= 1e-9 && mean != &best_mean)
        .count();
    let run = runs.into_iter().nth(best_idx).expect("index in range");
    (best_mean, run, alternatives)
}

fn mm_initializers(sample: &Sample, opts: &MmOptions) -> Vec<PartitionMatrix> {
    let restarts = opts.restarts.max(1);
    let n = sample.len();
    let n_members = restarts.div_ceil(2).min(n);
    let mut rng = rng_for(opts.seed, u64::MAX, 0);

    let mut pool: Vec<usize> = (0..n).collect();
    if n > opts.candidate_limit.max(1) {
        pool.shuffle(&mut rng);
        pool.truncate(opts.candidate_limit.max(1));
        pool.sort_unstable();
    }
    let mut scored: Vec<(usize, f64)> = pool
        .par_iter()
        .map(|&i| (i, align_sample(sample, sample.members()[i].canonical()).0))
        .collect();
    scored.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));

    let mut inits: Vec<PartitionMatrix> = scored
        .iter()
        .take(n_members)
        .map(|&(i, _)| sample.members()[i].canonical().clone())
        .collect();

    while inits.len() < restarts {
        let k = n.min(3);
        let chosen: Vec<usize> = rand::seq::index::sample(&mut rng, n, k).into_vec();
        let weights: Vec<f64> = (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln() + 1e-12).collect();
        let total: f64 = weights.iter().sum();
        let anchor = sample.members()[chosen[0]].canonical();
        let (l, m) = (anchor.n_clusters(), anchor.n_points());
        let mut data = vec![0.0; l * m];
        for (&i, w) in chosen.iter().zip(&weights) {
            let x = sample.members()[i].canonical();
            let perm = align_matrices(anchor, x, 2.0).expect("shapes validated").permutation;
            for (acc, v) in data.iter_mut().zip(x.permute_rows(&perm).as_slice()) {
                *acc += w / total * v;
            }
        }
        inits.push(PartitionMatrix::from_convex_unchecked(l, m, data));
    }
    inits
}

/// Mean partition for `rho = delta_2^2` by alternating relabeling and averaging.
pub fn mean_partition_l2(sample: &Sample, opts: &MmOptions) -> Result<ConsensusResult> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let inits = mm_initializers(sample, opts);
    let restarts_used = inits.len();
    let runs: Vec<Run> = inits.into_par_iter().map(|init| run_mm(sample, init, opts)).collect();
    let (mean, run, alternative_optima) = merge_runs(runs);

    let (_, alignments) = align_sample(sample, mean.canonical());
    let hardened = if opts.harden {
        let hard = canonicalize(&mean.canonical().harden());
        let variation = frechet_of(sample, hard.canonical(), &FrechetSpec::l2_squared())?;
        Some(HardenedMean { mean: hard, variation })
    } else {
        None
    };
    Ok(ConsensusResult {
        mean,
        variation: run.value,
        alignments,
        trace: run.trace,
        restarts_used,
        converged: run.converged,
        alternative_optima,
        hardened,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Cap on accepted moves per restart.
    pub max_moves: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            restarts: 10,
            seed: 0,
            max_moves: 10_000,
        }
    }
}

/// Final labels, value trace, and whether a local optimum was reached.
type SearchRun = (Vec<usize>, Vec<f64>, bool);

struct Search<'a> {
    sample: &'a Sample,
    spec: &'a FrechetSpec,
    n_clusters: usize,
}

impl Search<'_> {
    fn value(&self, labels: &[usize]) -> Result<f64> {
        let z = PartitionMatrix::from_labels(labels, self.n_clusters)?;
        frechet_of(self.sample, &z, self.spec)
    }

    fn run<R: Rng>(&self, mut labels: Vec<usize>, max_moves: usize, rng: &mut R) -> Result<SearchRun> {
        let mut value = self.value(&labels)?;
        let mut trace = vec![value];
        let mut moves: Vec<(usize, usize)> = (0..labels.len())
            .flat_map(|j| (0..self.n_clusters).map(move |k| (j, k)))
            .collect();
        for _ in 0..max_moves {
            moves.shuffle(rng);
            let mut improved = false;
            for &(point, label) in &moves {
                if labels[point] == label {
                    continue;
                }
                let previous = labels[point];
                labels[point] = label;
                match self.value(&labels) {
                    Ok(candidate) if candidate < value - 1e-12 => {
                        value = candidate;
                        trace.push(value);
                        improved = true;
                        break;
                    }
                    Ok(_) | Err(Error::DegeneratePartition { .. }) => labels[point] = previous,
                    Err(e) => return Err(e),
                }
            }
            if !improved {
                return Ok((labels, trace, true));
            }
        }
        Ok((labels, trace, false))
    }
}

/// Local search over hard partitions for an arbitrary dissimilarity.
///
/// Each restart starts from a hardened sample member or a uniformly random
/// hard partition and applies improving single-point reassignments, scanned
/// in a seeded random order, until none is left.
pub fn mean_partition_search(sample: &Sample, spec: &FrechetSpec, opts: &SearchOptions) -> Result<ConsensusResult> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let search = Search {
        sample,
        spec,
        n_clusters: sample.n_clusters(),
    };
    let restarts = opts.restarts.max(1);
    let from_members = restarts.div_ceil(2);
    let outcomes: Vec<Result<SearchRun>> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_for(opts.seed, r as u64, 1);
            let start = if r < from_members {
                let i = rng.random_range(0..sample.len());
                sample.members()[i].canonical().labels()
            } else {
                (0..sample.n_points())
                    .map(|_| rng.random_range(0..search.n_clusters))
                    .collect()
            };
            search.run(start, opts.max_moves, &mut rng)
        })
        .collect();

    let mut first_error = None;
    let mut runs = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok((labels, trace, converged)) => {
                let mean = PartitionMatrix::from_labels(&labels, search.n_clusters)?;
                let value = *trace.last().expect("trace starts with the initial value");
                runs.push(Run { mean, value, trace, converged });
            }
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    if runs.is_empty() {
        return Err(first_error.unwrap_or(Error::EmptySample));
    }
    let (mean, run, alternative_optima) = merge_runs(runs);
    Ok(ConsensusResult {
        mean,
        variation: run.value,
        alignments: Vec::new(),
        trace: run.trace,
        restarts_used: restarts,
        converged: run.converged,
        alternative_optima,
        hardened: None,
    })
}

/// Largest cluster count accepted by [`brute_force_mean`].
pub const BRUTE_FORCE_MAX_CLUSTERS: usize = 3;
pub const BRUTE_FORCE_DEFAULT_POINTS: usize = 8;

/// Every hard partition of `n_points` points into at most `n_clusters`
/// clusters, one restricted-growth labeling per orbit.
pub fn enumerate_hard_partitions(n_clusters: usize, n_points: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, used: usize, n_clusters: usize, n_points: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n_points {
            out.push(prefix.clone());
            return;
        }
        let limit = (used + 1).min(n_clusters);
        for label in 0..limit {
            prefix.push(label);
            extend(prefix, used.max(label + 1), n_clusters, n_points, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n_clusters > 0 && n_points > 0 {
        extend(&mut Vec::with_capacity(n_points), 0, n_clusters, n_points, &mut out);
    }
    out
}

/// Exact minimizer of `F_n` over hard partitions, by enumeration.
pub fn brute_force_mean(sample: &Sample, spec: &FrechetSpec, max_points: usize) -> Result<ConsensusResult> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let (l, m) = (sample.n_clusters(), sample.n_points());
    if m > max_points || l > BRUTE_FORCE_MAX_CLUSTERS {
        return Err(Error::TooLarge(format!(
            "{l} clusters over {m} points (limits: {BRUTE_FORCE_MAX_CLUSTERS} clusters, {max_points} points)"
        )));
    }
    let candidates = enumerate_hard_partitions(l, m);
    let values: Vec<Option<f64>> = candidates
        .par_iter()
        .map(|labels| {
            let z = PartitionMatrix::from_labels(labels, l)?;
            match frechet_of(sample, &z, spec) {
                Ok(v) => Ok(Some(v)),
                Err(Error::DegeneratePartition { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;

    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.iter().enumerate() {
        if let Some(v) = *v {
            if best.is_none_or(|(_, b)| v < b - 1e-12) {
                best = Some((i, v));
            }
        }
    }
    let (best_idx, best_value) = best.ok_or(Error::DegeneratePartition {
        criterion: "every candidate",
    })?;
    let alternative_optima = values
        .iter()
        .enumerate()
        .filter(|&(i, v)| i != best_idx && v.is_some_and(|v| (v - best_value).abs() <= 1e-9))
        .count();
    Ok(ConsensusResult {
        mean: Partition::from_labels(&candidates[best_idx], l)?,
        variation: best_value,
        alignments: Vec::new(),
        trace: vec![best_value],
        restarts_used: 0,
        converged: true,
        alternative_optima,
        hardened: None,
    })
}

/// The sample variation `V_n`, using the solver suited to `spec`.
pub fn variation(sample: &Sample, spec: &FrechetSpec) -> Result<f64> {
    let result = if spec.is_l2_squared() {
        mean_partition_l2(sample, &MmOptions::default())?
    } else {
        mean_partition_search(sample, spec, &SearchOptions::default())?
    };
    Ok(result.variation)
}
