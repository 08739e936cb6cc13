//! Sampling models on partition space and Monte-Carlo experiments.
//!
//! Two models are provided: hard label noise around a base partition, and
//! soft partitions whose columns are Dirichlet draws centered on the base
//! columns. Experiments estimate the population mean partition `M*` and
//! variation `V*` from one large reference sample, then measure how sample
//! means and variations approach them (consistency) and how
//! `sqrt(n) (V_n - V*)` is distributed (central limit behavior).
//!
//! Every random quantity is drawn from a generator seeded by
//! `seed ^ hash(coordinates)`, so reports are a pure function of their
//! configuration regardless of thread scheduling.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::Serialize;

use crate::consensus::{mean_partition_l2, mean_partition_search, ConsensusResult, FrechetSpec, MmOptions, Sample, SearchOptions};
use crate::error::{Error, Result};
use crate::metrics::{delta_p, MetricSpec};
use crate::partition::{canonicalize, Partition, PartitionMatrix};
use crate::seeding::{derive_seed, rng_for};

/// Coordinate reserved for reference samples in seed derivation.
const REFERENCE_STREAM: u64 = u64::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Model {
    /// Each point keeps its base label with probability `1 - epsilon`,
    /// otherwise draws a label uniformly from all clusters.
    LabelNoise { epsilon: f64 },
    /// Column `j` is drawn from `Dirichlet(scale * x_j + floor)`.
    DirichletSoft { scale: f64, floor: f64 },
}

/// A sampleable distribution on partitions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistributionSpec {
    #[serde(flatten)]
    model: Model,
    base: Partition,
    seed: u64,
}

impl DistributionSpec {
    pub fn new(model: Model, base: Partition, seed: u64) -> Result<Self> {
        match model {
            Model::LabelNoise { epsilon } => {
                if !(0.0..=1.0).contains(&epsilon) {
                    return Err(Error::InvalidParameter(format!("epsilon {epsilon} outside [0, 1]")));
                }
                if !base.is_hard() {
                    return Err(Error::InvalidParameter("label noise needs a hard base partition".into()));
                }
            }
            Model::DirichletSoft { scale, floor } => {
                if !(scale > 0.0 && scale.is_finite() && floor > 0.0 && floor.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "dirichlet concentration ({scale}, {floor}) must be positive"
                    )));
                }
            }
        }
        Ok(Self { model, base, seed })
    }

    pub fn label_noise(base: Partition, epsilon: f64, seed: u64) -> Result<Self> {
        Self::new(Model::LabelNoise { epsilon }, base, seed)
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn base(&self) -> &Partition {
        &self.base
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    fn draw_member(&self, index: usize) -> Partition {
        let mut rng = rng_for(self.seed, index as u64, 0);
        let base = self.base.canonical();
        let (l, m) = (base.n_clusters(), base.n_points());
        let matrix = match self.model {
            Model::LabelNoise { epsilon } => {
                let labels: Vec<usize> = base
                    .labels()
                    .into_iter()
                    .map(|label| {
                        if rng.random::<f64>() < epsilon {
                            rng.random_range(0..l)
                        } else {
                            label
                        }
                    })
                    .collect();
                PartitionMatrix::from_labels(&labels, l).expect("labels in range")
            }
            Model::DirichletSoft { scale, floor } => {
                let mut data = vec![0.0; l * m];
                for j in 0..m {
                    let draws: Vec<f64> = base
                        .column(j)
                        .map(|x| {
                            Gamma::new(scale * x + floor, 1.0)
                                .expect("positive shape")
                                .sample(&mut rng)
                        })
                        .collect();
                    let total: f64 = draws.iter().sum();
                    for k in 0..l {
                        data[k * m + j] = if total > 0.0 { draws[k] / total } else { base.get(k, j) };
                    }
                }
                PartitionMatrix::from_convex_unchecked(l, m, data)
            }
        };
        canonicalize(&matrix)
    }
}

/// `n` i.i.d. draws; member `i` depends only on `(seed, i)`.
pub fn sample(dist: &DistributionSpec, n: usize) -> Result<Sample> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be >= 1".into()));
    }
    let members = (0..n).into_par_iter().map(|i| dist.draw_member(i)).collect();
    Sample::new(members)
}

fn solve(sample: &Sample, rho: &FrechetSpec, seed: u64, restarts: usize) -> Result<ConsensusResult> {
    if rho.is_l2_squared() {
        let opts = MmOptions {
            restarts,
            seed,
            ..MmOptions::default()
        };
        mean_partition_l2(sample, &opts)
    } else {
        let opts = SearchOptions {
            restarts,
            seed,
            ..SearchOptions::default()
        };
        mean_partition_search(sample, rho, &opts)
    }
}

/// Summary statistics of a set of replication values.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (denominator `count - 1`).
    pub std: f64,
    pub min: f64,
    pub q05: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub q95: f64,
    pub max: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let count = sorted.len();
        let mean = sorted.iter().sum::<f64>() / count as f64;
        let var = if count > 1 {
            sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64
        } else {
            0.0
        };
        Self {
            count,
            mean,
            std: var.sqrt(),
            min: sorted[0],
            q05: quantile(&sorted, 0.05),
            q25: quantile(&sorted, 0.25),
            median: quantile(&sorted, 0.5),
            q75: quantile(&sorted, 0.75),
            q95: quantile(&sorted, 0.95),
            max: sorted[count - 1],
        }
    }
}

/// Plug-in estimates of the population mean partition and variation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReferenceEstimate {
    pub n_ref: usize,
    pub seed: u64,
    pub variation: f64,
    /// Standard deviation of `rho(X_i, M*)` over the reference sample.
    pub member_std: f64,
    pub mean: Partition,
}

/// Estimates `M*` and `V*` from a reference sample drawn on stream `stream`.
pub fn reference_estimate(
    dist: &DistributionSpec,
    rho: &FrechetSpec,
    n_ref: usize,
    stream: u64,
    restarts: usize,
) -> Result<ReferenceEstimate> {
    let seed = derive_seed(dist.seed, REFERENCE_STREAM, stream);
    let reference = sample(&dist.with_seed(seed), n_ref)?;
    let result = solve(&reference, rho, seed, restarts)?;
    let contributions: Vec<f64> = reference
        .members()
        .par_iter()
        .map(|x| rho.eval(x.canonical(), result.mean.canonical()))
        .collect::<Result<_>>()?;
    Ok(ReferenceEstimate {
        n_ref,
        seed,
        variation: result.variation,
        member_std: Summary::of(&contributions).std,
        mean: result.mean,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Replication {
    pub index: usize,
    pub seed: u64,
    pub variation: f64,
    /// `delta_2(M_n, M*)`.
    pub distance_to_reference: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cell {
    pub n: usize,
    pub replications: Vec<Replication>,
    pub variation: Summary,
    pub distance: Summary,
    /// `|V_n - V*|`.
    pub variation_error: Summary,
}

fn run_cell(
    dist: &DistributionSpec,
    rho: &FrechetSpec,
    n: usize,
    reps: usize,
    restarts: usize,
    reference: &ReferenceEstimate,
) -> Result<Cell> {
    let replications: Vec<Replication> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(dist.seed, n as u64, r as u64);
            let draws = sample(&dist.with_seed(seed), n)?;
            let result = solve(&draws, rho, seed, restarts)?;
            Ok(Replication {
                index: r,
                seed,
                variation: result.variation,
                distance_to_reference: delta_p(&result.mean, &reference.mean, MetricSpec::L2)?,
            })
        })
        .collect::<Result<_>>()?;
    let variations: Vec<f64> = replications.iter().map(|r| r.variation).collect();
    let distances: Vec<f64> = replications.iter().map(|r| r.distance_to_reference).collect();
    let errors: Vec<f64> = variations.iter().map(|v| (v - reference.variation).abs()).collect();
    if variations.iter().chain(&distances).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite replication value at n = {n}")));
    }
    Ok(Cell {
        n,
        variation: Summary::of(&variations),
        distance: Summary::of(&distances),
        variation_error: Summary::of(&errors),
        replications,
    })
}

/// Outcome of a Kolmogorov-Smirnov test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsTest {
    pub statistic: f64,
    pub p_value: f64,
}

fn normal_cdf(x: f64, mean: f64, std: f64) -> f64 {
    0.5 * libm::erfc(-(x - mean) / (std * std::f64::consts::SQRT_2))
}

/// Asymptotic Kolmogorov distribution tail with the Stephens small-sample correction.
fn kolmogorov_p_value(statistic: f64, n: usize) -> f64 {
    let sqrt_n = (n as f64).sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * statistic;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample KS test of `values` against `N(mean, std^2)`.
pub fn ks_normal(values: &[f64], mean: f64, std: f64) -> KsTest {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let statistic = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal_cdf(x, mean, std);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    KsTest {
        statistic,
        p_value: kolmogorov_p_value(statistic, sorted.len()),
    }
}

/// Sample skewness `m3 / m2^1.5` and excess kurtosis `m4 / m2^2 - 3`.
pub fn shape_moments(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let moment = |k: i32| values.iter().map(|v| (v - mean).powi(k)).sum::<f64>() / n;
    let m2 = moment(2);
    (moment(3) / m2.powf(1.5), moment(4) / (m2 * m2) - 3.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsistencyVerdict {
    pub distance_medians: Vec<f64>,
    pub variation_error_medians: Vec<f64>,
    pub distance_non_increasing: bool,
    pub variation_error_non_increasing: bool,
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CltSummary {
    pub scaling: &'static str,
    pub scaling_note: &'static str,
    /// `sqrt(n) (V_n^(r) - V*)` for each replication.
    pub statistics: Vec<f64>,
    pub summary: Summary,
    /// True when every statistic is identical; no distributional test is run then.
    pub zero_variance: bool,
    pub skewness: Option<f64>,
    pub excess_kurtosis: Option<f64>,
    /// KS test against the normal law with fitted mean and variance.
    pub ks_fitted: Option<KsTest>,
    /// KS test against `N(0, s^2)` with `s^2` the sample variance.
    pub ks_zero_mean: Option<KsTest>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: &'static str,
    pub distribution: DistributionSpec,
    pub rho: FrechetSpec,
    pub n_grid: Vec<usize>,
    pub reps: usize,
    pub n_ref: usize,
    pub restarts: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub reference: ReferenceEstimate,
    pub cells: Vec<Cell>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub consistency: Option<ConsistencyVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clt: Option<CltSummary>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report contains only finite plain data")
    }

    /// Raw per-replication values, one line per replication.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,replication,seed,variation,distance_to_reference,variation_error,clt_statistic\n");
        let clt = self.clt.as_ref();
        for cell in &self.cells {
            for rep in &cell.replications {
                let t = clt
                    .map(|c| format!("{}", c.statistics[rep.index]))
                    .unwrap_or_default();
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    cell.n,
                    rep.index,
                    rep.seed,
                    rep.variation,
                    rep.distance_to_reference,
                    (rep.variation - self.reference.variation).abs(),
                    t
                ));
            }
        }
        out
    }
}

/// Solver restarts used by experiments unless overridden.
pub const DEFAULT_RESTARTS: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyConfig {
    pub n_grid: Vec<usize>,
    pub reps: usize,
    pub n_ref: usize,
    pub restarts: usize,
}

fn non_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] <= w[0])
}

/// Measures `delta_2(M_n, M*)` and `|V_n - V*|` over a grid of sample sizes.
pub fn run_consistency_experiment(
    dist: &DistributionSpec,
    rho: &FrechetSpec,
    config: &ConsistencyConfig,
) -> Result<ExperimentReport> {
    if config.n_grid.is_empty() || config.n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("n grid must be non-empty and strictly ascending".into()));
    }
    if config.reps < 10 {
        return Err(Error::InvalidParameter(format!("{} replications; need at least 10", config.reps)));
    }
    let largest = *config.n_grid.last().expect("non-empty");
    if config.n_ref < largest {
        return Err(Error::InvalidParameter(format!(
            "reference size {} is below the largest sample size {largest}",
            config.n_ref
        )));
    }
    let reference = reference_estimate(dist, rho, config.n_ref, 0, config.restarts)?;
    let cells = config
        .n_grid
        .iter()
        .map(|&n| run_cell(dist, rho, n, config.reps, config.restarts, &reference))
        .collect::<Result<Vec<_>>>()?;
    let distance_medians: Vec<f64> = cells.iter().map(|c| c.distance.median).collect();
    let variation_error_medians: Vec<f64> = cells.iter().map(|c| c.variation_error.median).collect();
    let distance_non_increasing = non_increasing(&distance_medians);
    let variation_error_non_increasing = non_increasing(&variation_error_medians);
    Ok(ExperimentReport {
        config: ExperimentConfig {
            experiment: "consistency",
            distribution: dist.clone(),
            rho: *rho,
            n_grid: config.n_grid.clone(),
            reps: config.reps,
            n_ref: config.n_ref,
            restarts: config.restarts,
        },
        reference,
        cells,
        consistency: Some(ConsistencyVerdict {
            distance_medians,
            variation_error_medians,
            distance_non_increasing,
            variation_error_non_increasing,
            consistent: distance_non_increasing && variation_error_non_increasing,
        }),
        clt: None,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CltConfig {
    pub n: usize,
    pub reps: usize,
    pub n_ref: usize,
    pub restarts: usize,
}

/// Distribution of `sqrt(n) (V_n - V*)` over independent replications.
pub fn run_clt_experiment(dist: &DistributionSpec, rho: &FrechetSpec, config: &CltConfig) -> Result<ExperimentReport> {
    if config.reps < 100 {
        return Err(Error::InvalidParameter(format!("{} replications; need at least 100", config.reps)));
    }
    if config.n == 0 || config.n_ref < config.n {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= n <= n_ref, got n = {}, n_ref = {}",
            config.n, config.n_ref
        )));
    }
    let reference = reference_estimate(dist, rho, config.n_ref, 0, config.restarts)?;
    let cell = run_cell(dist, rho, config.n, config.reps, config.restarts, &reference)?;
    let root_n = (config.n as f64).sqrt();
    let statistics: Vec<f64> = cell
        .replications
        .iter()
        .map(|r| root_n * (r.variation - reference.variation))
        .collect();
    let summary = Summary::of(&statistics);
    let zero_variance = statistics.iter().all(|&t| t == statistics[0]);
    let (skewness, excess_kurtosis, ks_fitted, ks_zero_mean) = if zero_variance {
        (None, None, None, None)
    } else {
        let (skew, kurt) = shape_moments(&statistics);
        (
            Some(skew),
            Some(kurt),
            Some(ks_normal(&statistics, summary.mean, summary.std)),
            Some(ks_normal(&statistics, 0.0, summary.std)),
        )
    };
    Ok(ExperimentReport {
        config: ExperimentConfig {
            experiment: "clt",
            distribution: dist.clone(),
            rho: *rho,
            n_grid: vec![config.n],
            reps: config.reps,
            n_ref: config.n_ref,
            restarts: config.restarts,
        },
        reference,
        cells: vec![cell],
        consistency: None,
        clt: Some(CltSummary {
            scaling: "sqrt(n) * (V_n - V_ref)",
            scaling_note: "dividing by sqrt(n) instead would collapse the statistic to a point mass",
            statistics,
            summary,
            zero_variance,
            skewness,
            excess_kurtosis,
            ks_fitted,
            ks_zero_mean,
        }),
    })
}
