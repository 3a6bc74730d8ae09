use proptest::prelude::*;
use ttp_core::{Instance, InstanceData, Item, Tour};

/// Small instances: at most 6 cities, 12 items, capacity 30, data in 1..=10.
pub fn small_instance() -> impl Strategy<Value = Instance> {
    (2usize..=6, 0usize..=12, 1u64..=30, prop_oneof![Just(0.5), Just(1.0), Just(2.5)])
        .prop_flat_map(|(n, m, capacity, rent)| {
            (
                prop::collection::vec((0u32..=20, 0u32..=20), n),
                prop::collection::vec((1u64..=10, 1u64..=10, 1..n), m),
                Just(capacity),
                Just(rent),
            )
        })
        .prop_map(|(coords, items, capacity, renting_ratio)| {
            let data = InstanceData {
                name: "random".into(),
                knapsack_type: "uncorrelated".into(),
                coords: coords.into_iter().map(|(x, y)| (x as f64, y as f64)).collect(),
                items: items
                    .into_iter()
                    .map(|(profit, weight, node)| Item { profit, weight, node })
                    .collect(),
                capacity,
                min_speed: 0.1,
                max_speed: 1.0,
                renting_ratio,
            };
            Instance::new(data).expect("generated instance is valid")
        })
}

#[allow(dead_code)]
pub fn instance_and_tour() -> impl Strategy<Value = (Instance, Tour)> {
    (small_instance(), any::<u64>()).prop_map(|(inst, seed)| {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let tour = Tour::random(inst.num_cities(), &mut rng);
        (inst, tour)
    })
}
