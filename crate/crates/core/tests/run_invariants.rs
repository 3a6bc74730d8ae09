mod common;

use proptest::prelude::*;
use ttp_core::front::{hypervolume, pareto_filter};
use ttp_core::{parse_instance, run_ibea, IbeaConfig, IndicatorKind, SelectionScheme};

fn config(mu: usize, generations: usize, seed: u64) -> IbeaConfig {
    IbeaConfig {
        mu,
        generations,
        seed,
        seed_generations: 20,
        ..IbeaConfig::default()
    }
}

fn scheme() -> impl Strategy<Value = SelectionScheme> {
    prop::sample::select(SelectionScheme::ALL.to_vec())
}

fn indicator() -> impl Strategy<Value = IndicatorKind> {
    prop_oneof![Just(IndicatorKind::Lsc), Just(IndicatorKind::Lhv)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn archive_metrics_never_decrease(
        inst in common::small_instance().prop_filter("needs a tour to vary", |i| i.num_cities() >= 3),
        selection in scheme(),
        indicator in indicator(),
        mu in 2usize..=6,
        both in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let cfg = IbeaConfig { selection, indicator, both_orientations: both, ..config(mu, 15, seed) };
        let run = run_ibea(&inst, &cfg).unwrap();
        prop_assert_eq!(run.records.len(), 16);
        prop_assert_eq!(run.population.len(), mu);
        for w in run.records.windows(2) {
            prop_assert!(w[1].best_reward >= w[0].best_reward);
            prop_assert!(w[1].archive_hypervolume >= w[0].archive_hypervolume);
        }
        let last = run.records.last().unwrap();
        prop_assert_eq!(last.best_reward, run.best.reward);
        prop_assert!(last.surface_hypervolume <= last.archive_hypervolume + 1e-9);
        prop_assert_eq!(pareto_filter(&last.surface), last.surface.clone());
        prop_assert!((hypervolume(&run.archive, inst.capacity()) - last.archive_hypervolume).abs() < 1e-9);
    }
}

#[test]
fn reruns_are_identical_on_a_benchmark_sized_instance() {
    let inst = parse_instance(include_str!("../data/eil51_n50_synthetic.ttp")).unwrap();
    let cfg = IbeaConfig {
        mu: 10,
        generations: 30,
        seed: 3,
        seed_generations: 200,
        ..IbeaConfig::default()
    };
    let a = run_ibea(&inst, &cfg).unwrap();
    let b = run_ibea(&inst, &cfg).unwrap();
    assert_eq!(a.records, b.records);
    assert_eq!(a.population, b.population);
    assert_eq!(a.best, b.best);
    let c = run_ibea(&inst, &IbeaConfig { seed: 4, ..cfg }).unwrap();
    assert_ne!(a.records, c.records);
}
