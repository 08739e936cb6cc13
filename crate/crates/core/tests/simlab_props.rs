use mean_partition::consensus::FrechetSpec;
use mean_partition::metrics::{delta_p, MetricSpec};
use mean_partition::simlab::{
    reference_estimate, run_consistency_experiment, sample, ConsistencyConfig, DistributionSpec, Model, Summary,
};
use mean_partition::{Partition, PartitionMatrix};
use proptest::prelude::*;

/// Loose bound on delta_2 between means of two reference samples of size 2000.
const MEAN_GAP: f64 = 0.25;

fn base(l: usize, m: usize) -> Partition {
    let labels: Vec<usize> = (0..m).map(|j| j % l).collect();
    Partition::from_labels(&labels, l).unwrap()
}

fn arb_model() -> impl Strategy<Value = Model> {
    prop_oneof![
        (0.0f64..=1.0).prop_map(|epsilon| Model::LabelNoise { epsilon }),
        (0.5f64..20.0, 0.05f64..2.0).prop_map(|(scale, floor)| Model::DirichletSoft { scale, floor }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn members_depend_only_on_seed_and_index(
        model in arb_model(),
        seed in any::<u64>(),
        (l, m) in (1usize..=4, 1usize..=10),
        n in 1usize..12,
        extra in 1usize..5,
    ) {
        let dist = DistributionSpec::new(model, base(l, m), seed).unwrap();
        let short = sample(&dist, n).unwrap();
        let long = sample(&dist, n + extra).unwrap();
        for (a, b) in short.members().iter().zip(long.members()) {
            prop_assert_eq!(a.canonical(), b.canonical());
        }
        for x in long.members() {
            prop_assert!(PartitionMatrix::validate(&x.canonical().to_rows()).is_ok());
            prop_assert_eq!(x.n_clusters(), l);
            prop_assert_eq!(x.n_points(), m);
        }
    }

    #[test]
    fn label_noise_members_are_hard(epsilon in 0.0f64..=1.0, seed in any::<u64>()) {
        let dist = DistributionSpec::label_noise(base(3, 9), epsilon, seed).unwrap();
        prop_assert!(sample(&dist, 6).unwrap().members().iter().all(Partition::is_hard));
    }

    #[test]
    fn summary_is_ordered(values in proptest::collection::vec(-1e6f64..1e6, 1..50)) {
        let s = Summary::of(&values);
        prop_assert!(s.min <= s.q05 && s.q05 <= s.q25 && s.q25 <= s.median);
        prop_assert!(s.median <= s.q75 && s.q75 <= s.q95 && s.q95 <= s.max);
        prop_assert!(s.std >= 0.0);
    }
}

#[test]
fn different_seeds_give_different_samples() {
    let a = sample(&DistributionSpec::label_noise(base(3, 30), 0.5, 1).unwrap(), 3).unwrap();
    let b = sample(&DistributionSpec::label_noise(base(3, 30), 0.5, 2).unwrap(), 3).unwrap();
    assert!(a.members().iter().zip(b.members()).any(|(x, y)| x.canonical() != y.canonical()));
}

#[test]
fn independent_reference_samples_agree() {
    let dist = DistributionSpec::label_noise(base(3, 20), 0.2, 42).unwrap();
    let rho = FrechetSpec::l2_squared();
    let n_ref = 2000;
    let first = reference_estimate(&dist, &rho, n_ref, 0, 4).unwrap();
    let second = reference_estimate(&dist, &rho, n_ref, 1, 4).unwrap();
    assert_ne!(first.seed, second.seed);
    // difference of two independent means, five standard errors
    let bound = 5.0 * first.member_std * (2.0 / n_ref as f64).sqrt();
    assert!(
        (first.variation - second.variation).abs() <= bound,
        "{} vs {} (bound {bound})",
        first.variation,
        second.variation
    );
    let gap = delta_p(&first.mean, &second.mean, MetricSpec::L2).unwrap();
    assert!(gap <= MEAN_GAP, "reference means differ by {gap}");
}

#[test]
fn extending_the_grid_keeps_earlier_cells() {
    let dist = DistributionSpec::label_noise(base(3, 12), 0.3, 9).unwrap();
    let rho = FrechetSpec::l2_squared();
    let config = |n_grid: Vec<usize>| ConsistencyConfig {
        n_grid,
        reps: 10,
        n_ref: 100,
        restarts: 3,
    };
    let short = run_consistency_experiment(&dist, &rho, &config(vec![5, 10])).unwrap();
    let long = run_consistency_experiment(&dist, &rho, &config(vec![5, 10, 40])).unwrap();
    assert_eq!(short.reference, long.reference);
    assert_eq!(short.cells[..], long.cells[..2]);
}

#[test]
fn reports_echo_their_configuration() {
    let dist = DistributionSpec::label_noise(base(2, 6), 0.1, 5).unwrap();
    let report = run_consistency_experiment(
        &dist,
        &FrechetSpec::l2_squared(),
        &ConsistencyConfig {
            n_grid: vec![3],
            reps: 10,
            n_ref: 20,
            restarts: 2,
        },
    )
    .unwrap();
    let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    assert_eq!(json["config"]["experiment"], "consistency");
    assert_eq!(json["config"]["distribution"]["model"], "label_noise");
    assert_eq!(json["config"]["distribution"]["epsilon"], 0.1);
    assert_eq!(json["config"]["distribution"]["seed"], 5);
    assert_eq!(json["config"]["reps"], 10);
    assert_eq!(json["cells"][0]["replications"].as_array().unwrap().len(), 10);
}
