use bestarm::osmd::run_osmd;
use bestarm::{BernoulliInstance, EstimatorVariant, OsmdConfig, RngStream};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pulls_and_regret_are_consistent(
        means in prop::collection::vec(0.0f64..=1.0, 1..8),
        rounds in 0u64..400,
        seed in any::<u64>(),
        unweighted in any::<bool>(),
    ) {
        let inst = BernoulliInstance::new(means).unwrap();
        let arms: Vec<usize> = (0..inst.n_arms()).collect();
        let variant = if unweighted {
            EstimatorVariant::Unweighted
        } else {
            EstimatorVariant::CenteredImportanceWeighted
        };
        let cfg = OsmdConfig::new(rounds).with_variant(variant);
        let stats = run_osmd(&arms, &inst, &cfg, &mut RngStream::new(seed, 0)).unwrap();
        prop_assert_eq!(stats.pulls().iter().sum::<u64>(), rounds);
        prop_assert_eq!(stats.rounds(), rounds);
        let regret = stats.regret(&inst);
        let max_gap = inst.gaps().into_iter().fold(0.0, f64::max);
        prop_assert!(regret >= 0.0);
        prop_assert!(regret <= rounds as f64 * max_gap + 1e-9);
        prop_assert!(stats.cumulative_reward() <= rounds as f64);
    }

    #[test]
    fn regret_on_subset_ignores_other_arms(seed in any::<u64>()) {
        let inst = BernoulliInstance::new(vec![0.9, 0.2, 0.5, 0.4]).unwrap();
        let stats = run_osmd(&[1, 3], &inst, &OsmdConfig::new(200), &mut RngStream::new(seed, 1)).unwrap();
        prop_assert_eq!(stats.pulls()[0] + stats.pulls()[2], 0);
        prop_assert_eq!(stats.pulls()[1] + stats.pulls()[3], 200);
    }
}

#[test]
fn equal_means_have_zero_regret() {
    let inst = BernoulliInstance::new(vec![0.3; 6]).unwrap();
    let arms: Vec<usize> = (0..6).collect();
    let stats = run_osmd(
        &arms,
        &inst,
        &OsmdConfig::new(1000),
        &mut RngStream::new(2, 2),
    )
    .unwrap();
    assert_eq!(stats.regret(&inst), 0.0);
}

#[test]
fn importance_weighting_beats_unweighted_on_ten_arms() {
    let inst = bestarm::hard_instance(10, 0.1, None).unwrap();
    let arms: Vec<usize> = (0..10).collect();
    let mean_regret = |variant| {
        let cfg = OsmdConfig::new(10_000).with_variant(variant);
        (0..40)
            .map(|t| {
                run_osmd(&arms, &inst, &cfg, &mut RngStream::new(5, t))
                    .unwrap()
                    .regret(&inst)
            })
            .sum::<f64>()
            / 40.0
    };
    let weighted = mean_regret(EstimatorVariant::CenteredImportanceWeighted);
    let unweighted = mean_regret(EstimatorVariant::Unweighted);
    assert!(weighted < (2.0f64 * 10.0 * 1e4).sqrt());
    assert!(
        weighted < unweighted,
        "weighted {weighted}, unweighted {unweighted}"
    );
}
