use schoolmatch::{BuiltinScenario, StrategyKind};
use schoolmatch_harness::config::{Algorithm, ExperimentConfig, PostOptimizer};
use schoolmatch_harness::runner::{run_matrix, strategy_study};

#[test]
fn zero_fraction_strategy_study_matches_plain_run() {
    let config = ExperimentConfig::new(BuiltinScenario::C, Algorithm::BostonStb)
        .with_post(PostOptimizer::Pe)
        .with_experiments(5);
    let plain = run_matrix(&config).unwrap();
    let study = strategy_study(&config.clone().with_strategy(StrategyKind::Cautious, 0.0)).unwrap();
    assert_eq!(
        study
            .strategic
            .summary
            .strategists
            .as_ref()
            .unwrap()
            .experiments,
        0
    );
    let honest = study.strategic.summary.honest.as_ref().unwrap();
    assert_eq!(honest.mean_q, plain.summary.all.mean_q);
    for (a, b) in study.strategic.records.iter().zip(&plain.records) {
        assert_eq!(a.q, b.q);
        assert_eq!(a.histogram, b.histogram);
        assert_eq!(a.strategists.as_ref().unwrap().pupils, 0);
    }
    for (a, b) in study.strategic.records.iter().zip(&study.reference.records) {
        assert_eq!((a.q, &a.histogram, a.swaps), (b.q, &b.histogram, b.swaps));
    }
}

#[test]
fn records_are_consistent() {
    for alg in Algorithm::ALL {
        let out = run_matrix(
            &ExperimentConfig::new(BuiltinScenario::D, alg)
                .with_experiments(4)
                .with_seed(3),
        )
        .unwrap();
        for r in &out.records {
            assert_eq!(r.histogram.iter().sum::<usize>(), 1000);
            assert_eq!(r.cumulative.last(), Some(&1.0));
            assert_eq!(r.tiebreaks.is_some(), alg == Algorithm::Zeeburg);
            assert!(r.swaps.is_none());
        }
        let mean = out.records.iter().map(|r| r.q).sum::<f64>() / 4.0;
        assert!(((out.summary.all.mean_q - mean) / mean).abs() < 1e-12);
    }
}

#[test]
fn best_of_never_hurts_and_seeds_matter() {
    let base = ExperimentConfig::new(BuiltinScenario::B, Algorithm::DaMtb).with_experiments(6);
    let one = run_matrix(&base).unwrap();
    let ten = run_matrix(&base.clone().with_best_of(10)).unwrap();
    for (a, b) in one.records.iter().zip(&ten.records) {
        assert_eq!(a.seed, b.seed);
        assert!(b.q <= a.q);
    }
    assert!(ten.summary.all.mean_q < one.summary.all.mean_q);
    let other = run_matrix(&base.clone().with_seed(2)).unwrap();
    assert_ne!(other.records[0].seed, one.records[0].seed);
}
