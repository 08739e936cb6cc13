use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use mean_partition::consensus::{mean_partition_l2, mean_partition_search, FrechetSpec, MmOptions, Sample, SearchOptions};
use mean_partition::criteria::{evaluate, info_measures, CriterionKind, CriterionSpec, InfoNormalizer};
use mean_partition::io::{bundle_to_json, read_partition, read_partitions, write_text};
use mean_partition::metrics::{delta_p, MetricSpec};
use mean_partition::simlab::{
    run_clt_experiment, run_consistency_experiment, sample, CltConfig, ConsistencyConfig, DistributionSpec, Model,
    DEFAULT_RESTARTS,
};
use mean_partition::{canonicalize, Error, Partition, Result};

#[derive(Parser)]
#[command(name = "mean-partition", version, about = "Distances, comparison criteria and consensus for partitions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Permutation-minimized l_p distance between two partitions.
    Dist {
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        x: PathBuf,
        y: PathBuf,
    },
    /// Evaluate comparison criteria between two partitions.
    Compare {
        #[arg(long, required_unless_present = "all", conflicts_with = "all")]
        criterion: Option<CriterionKind>,
        /// Emit every criterion and information measure as JSON.
        #[arg(long)]
        all: bool,
        /// Normalize information measures by the number of point pairs.
        #[arg(long)]
        paper_normalizer: bool,
        x: PathBuf,
        y: PathBuf,
    },
    /// Mean partition of a sample.
    Consensus {
        /// `l2sq`, `l1`, `l2`, or a criterion name.
        #[arg(long, default_value = "l2sq")]
        rho: String,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
        /// Also report the per-column argmax rounding of the mean.
        #[arg(long)]
        harden: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Monte-Carlo experiments.
    Exp {
        #[command(subcommand)]
        kind: Experiment,
    },
    /// Draw a sample and write it as a bundle.
    Sample {
        #[command(flatten)]
        dist: DistArgs,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Experiment {
    Consistency {
        #[command(flatten)]
        common: ExpArgs,
        /// Comma-separated ascending sample sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        reps: usize,
    },
    Clt {
        #[command(flatten)]
        common: ExpArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 500)]
        reps: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    LabelNoise,
    Dirichlet,
}

#[derive(Args)]
struct DistArgs {
    #[arg(long, value_enum)]
    model: ModelKind,
    #[arg(long, default_value_t = 0.2)]
    eps: f64,
    #[arg(long, default_value_t = 10.0)]
    scale: f64,
    #[arg(long, default_value_t = 0.1)]
    floor: f64,
    #[arg(long)]
    base: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExpArgs {
    #[command(flatten)]
    dist: DistArgs,
    #[arg(long, default_value = "l2sq")]
    rho: String,
    #[arg(long, default_value_t = 10_000)]
    nref: usize,
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    restarts: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Raw replication values; defaults to the report path with a `.csv` extension.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn load(path: &Path) -> Result<Partition> {
    Ok(canonicalize(&read_partition(path)?))
}

fn parse_rho(text: &str, normalizer: InfoNormalizer) -> Result<FrechetSpec> {
    match text.to_ascii_lowercase().as_str() {
        "l2sq" => Ok(FrechetSpec::l2_squared()),
        "l1" => FrechetSpec::metric(MetricSpec::L1, 1.0),
        "l2" => FrechetSpec::metric(MetricSpec::L2, 1.0),
        other => other
            .parse::<CriterionKind>()
            .map(|kind| FrechetSpec::criterion(CriterionSpec::new(kind).with_normalizer(normalizer)))
            .map_err(|_| Error::InvalidParameter(format!("unknown dissimilarity `{text}`"))),
    }
}

/// `%.12g`-style rendering.
fn significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exponent = x.abs().log10().floor() as i32;
    if exponent < -5 || exponent >= digits as i32 {
        let s = format!("{:.*e}", digits - 1, x);
        let (mantissa, exp) = s.split_once('e').expect("scientific format");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        let exp: i32 = exp.parse().expect("integer exponent");
        format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exponent).max(0) as usize;
        let s = format!("{:.*}", decimals, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => write_text(path, text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn distribution(args: &DistArgs) -> Result<DistributionSpec> {
    let base = load(&args.base)?;
    let model = match args.model {
        ModelKind::LabelNoise => Model::LabelNoise { epsilon: args.eps },
        ModelKind::Dirichlet => Model::DirichletSoft {
            scale: args.scale,
            floor: args.floor,
        },
    };
    DistributionSpec::new(model, base, args.seed)
}

fn compare_all(x: &Partition, y: &Partition, normalizer: InfoNormalizer) -> Result<Value> {
    let mut criteria = Map::new();
    for kind in CriterionKind::ALL {
        let value = match evaluate(x, y, &CriterionSpec::new(kind).with_normalizer(normalizer)) {
            Ok(v) => json!(v),
            Err(Error::DegeneratePartition { .. } | Error::SinglePoint) => Value::Null,
            Err(e) => return Err(e),
        };
        criteria.insert(kind.name().to_string(), value);
    }
    let info = info_measures(x, y, normalizer)?;
    Ok(json!({
        "criteria": criteria,
        "info": info,
        "normalizer": normalizer,
    }))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Dist { p, x, y } => {
            let d = delta_p(&load(&x)?, &load(&y)?, MetricSpec::new(p)?)?;
            println!("{}", significant(d, 12));
        }
        Command::Compare {
            criterion,
            all,
            paper_normalizer,
            x,
            y,
        } => {
            let normalizer = if paper_normalizer {
                InfoNormalizer::Pairs
            } else {
                InfoNormalizer::Points
            };
            let (x, y) = (load(&x)?, load(&y)?);
            if all {
                let report = compare_all(&x, &y, normalizer)?;
                println!("{}", serde_json::to_string_pretty(&report).expect("plain data"));
            } else {
                let kind = criterion.expect("clap enforces --criterion without --all");
                let value = evaluate(&x, &y, &CriterionSpec::new(kind).with_normalizer(normalizer))?;
                println!("{}", significant(value, 12));
            }
        }
        Command::Consensus {
            rho,
            restarts,
            seed,
            max_iter,
            harden,
            out,
            files,
        } => {
            let mut members = Vec::new();
            for file in &files {
                members.extend(read_partitions(file)?.iter().map(canonicalize));
            }
            let sample = Sample::new(members)?;
            let spec = parse_rho(&rho, InfoNormalizer::Points)?;
            let result = if spec.is_l2_squared() {
                mean_partition_l2(
                    &sample,
                    &MmOptions {
                        restarts,
                        seed,
                        max_iter,
                        harden,
                        ..MmOptions::default()
                    },
                )?
            } else {
                mean_partition_search(
                    &sample,
                    &spec,
                    &SearchOptions {
                        restarts,
                        seed,
                        ..SearchOptions::default()
                    },
                )?
            };
            emit(&serde_json::to_string_pretty(&result).expect("plain data"), out.as_deref())?;
        }
        Command::Exp { kind } => {
            let (report, common) = match kind {
                Experiment::Consistency { common, n, reps } => {
                    let dist = distribution(&common.dist)?;
                    let rho = parse_rho(&common.rho, InfoNormalizer::Points)?;
                    let config = ConsistencyConfig {
                        n_grid: n,
                        reps,
                        n_ref: common.nref,
                        restarts: common.restarts,
                    };
                    (run_consistency_experiment(&dist, &rho, &config)?, common)
                }
                Experiment::Clt { common, n, reps } => {
                    let dist = distribution(&common.dist)?;
                    let rho = parse_rho(&common.rho, InfoNormalizer::Points)?;
                    let config = CltConfig {
                        n,
                        reps,
                        n_ref: common.nref,
                        restarts: common.restarts,
                    };
                    (run_clt_experiment(&dist, &rho, &config)?, common)
                }
            };
            emit(&report.to_json(), common.out.as_deref())?;
            let csv = common.csv.or_else(|| common.out.as_ref().map(|p| p.with_extension("csv")));
            if let Some(path) = csv {
                write_text(path, &report.to_csv())?;
            }
        }
        Command::Sample { dist, n, out } => {
            let draws = sample(&distribution(&dist)?, n)?;
            let text = bundle_to_json(draws.members().iter().map(Partition::canonical));
            emit(&text, out.as_deref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
