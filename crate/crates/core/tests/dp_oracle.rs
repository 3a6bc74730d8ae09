mod common;

use proptest::prelude::*;
use ttp_core::pwt::dp_points;
use ttp_core::{brute_force_front, dp_front, evaluate, parse_instance, Tour};

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn dp_matches_exhaustive_enumeration((inst, tour) in common::instance_and_tour()) {
        let dp = dp_front(&inst, &tour);
        let oracle = brute_force_front(&inst, &tour).unwrap();
        prop_assert_eq!(dp.points.len(), oracle.points.len(), "dp {:?} oracle {:?}", dp.points, oracle.points);
        for (p, q) in dp.points.iter().zip(&oracle.points) {
            prop_assert_eq!(p.weight, q.weight);
            prop_assert!(close(p.reward, q.reward), "{} vs {}", p.reward, q.reward);
        }
    }

    #[test]
    fn fronts_are_strict_staircases_with_matching_plans((inst, tour) in common::instance_and_tour()) {
        let front = dp_front(&inst, &tour);
        prop_assert_eq!(front.points[0].weight, 0);
        for w in front.points.windows(2) {
            prop_assert!(w[0].weight < w[1].weight);
            prop_assert!(w[0].reward < w[1].reward);
        }
        prop_assert_eq!(front.plans.len(), front.points.len());
        for (plan, point) in front.plans.iter().zip(&front.points) {
            let direct = evaluate(&inst, &tour, plan);
            prop_assert_eq!(direct.weight, point.weight);
            prop_assert!(direct.weight <= inst.capacity());
            prop_assert!(close(direct.reward, point.reward));
        }
        prop_assert_eq!(dp_points(&inst, &tour), front.points);
    }
}

#[test]
fn tiny4_global_optimum_over_all_tours() {
    let inst = parse_instance(include_str!("../data/tiny4.ttp")).unwrap();
    let mut best = f64::NEG_INFINITY;
    let mut best_tour = None;
    for rest in [[2, 3, 4], [2, 4, 3], [3, 2, 4], [3, 4, 2], [4, 2, 3], [4, 3, 2]] {
        let tour = Tour::from_one_based(&[1, rest[0], rest[1], rest[2]]).unwrap();
        let r = dp_front(&inst, &tour).best_reward();
        if r > best {
            best = r;
            best_tour = Some(tour);
        }
    }
    assert!((best - 19.348214).abs() < 1e-6);
    assert_eq!(best_tour.unwrap().to_one_based(), vec![1, 4, 3, 2]);
}
