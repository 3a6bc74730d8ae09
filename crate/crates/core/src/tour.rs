//! Tours, tour length, Inver-over seeding and the permutation variation operators.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::instance::Instance;

/// A closed tour over 0-based cities that always starts at the depot (city 0).
///
/// Serializes as a list of 1-based city numbers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tour(Vec<usize>);

impl Tour {
    /// Checks that `cities` is a permutation of `0..n` starting at city 0.
    pub fn new(cities: Vec<usize>) -> Result<Self> {
        let n = cities.len();
        if n == 0 {
            return Err(Error::InvalidTour("empty tour".into()));
        }
        if cities[0] != 0 {
            return Err(Error::InvalidTour("tour must start at city 1".into()));
        }
        let mut seen = vec![false; n];
        for &c in &cities {
            if c >= n {
                return Err(Error::InvalidTour(format!("city {} out of range", c + 1)));
            }
            if std::mem::replace(&mut seen[c], true) {
                return Err(Error::InvalidTour(format!("city {} repeated", c + 1)));
            }
        }
        Ok(Tour(cities))
    }

    pub fn from_one_based(cities: &[usize]) -> Result<Self> {
        if cities.contains(&0) {
            return Err(Error::InvalidTour("city numbers are 1-based".into()));
        }
        Tour::new(cities.iter().map(|&c| c - 1).collect())
    }

    /// The tour `1, 2, ..., n`.
    pub fn identity(n: usize) -> Self {
        Tour((0..n).collect())
    }

    /// A uniformly random tour over `n` cities.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut cities: Vec<usize> = (0..n).collect();
        cities[1..].shuffle(rng);
        Tour(cities)
    }

    pub fn cities(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|&c| c + 1).collect()
    }

    /// The same cycle walked in the opposite direction, still starting at the depot.
    pub fn reversed(&self) -> Self {
        let mut cities = self.0.clone();
        cities[1..].reverse();
        Tour(cities)
    }

    /// Rotates a cyclic sequence so that city 0 comes first.
    fn from_cycle(cycle: &[usize]) -> Self {
        let start = cycle.iter().position(|&c| c == 0).unwrap_or(0);
        let mut cities = Vec::with_capacity(cycle.len());
        cities.extend_from_slice(&cycle[start..]);
        cities.extend_from_slice(&cycle[..start]);
        Tour(cities)
    }
}

impl fmt::Display for Tour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| (c + 1).to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl Serialize for Tour {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_one_based().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Tour {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let cities = Vec::<usize>::deserialize(deserializer)?;
        Tour::from_one_based(&cities).map_err(serde::de::Error::custom)
    }
}

/// Sum of CEIL_2D leg lengths, including the closing leg back to the depot.
pub fn tour_length(inst: &Instance, tour: &Tour) -> u64 {
    cycle_length(inst, tour.cities())
}

fn cycle_length(inst: &Instance, cycle: &[usize]) -> u64 {
    let n = cycle.len();
    (0..n).map(|i| inst.dist(cycle[i], cycle[(i + 1) % n])).sum()
}

fn check_position(position: usize, n: usize) -> Result<()> {
    if position < 2 || position > n {
        return Err(Error::PositionOutOfRange { position, n });
    }
    Ok(())
}

/// Reverses the segment between 1-based positions `i..=j` (2OPT move).
pub fn two_opt_mutate(tour: &Tour, i: usize, j: usize) -> Result<Tour> {
    let n = tour.len();
    check_position(i, n)?;
    check_position(j, n)?;
    if i > j {
        return Err(Error::PositionOutOfRange { position: i, n: j });
    }
    let mut cities = tour.0.clone();
    cities[i - 1..j].reverse();
    Ok(Tour(cities))
}

/// Removes the city at 1-based position `from` and reinserts it at `to` (JUMP move).
pub fn jump_mutate(tour: &Tour, from: usize, to: usize) -> Result<Tour> {
    let n = tour.len();
    check_position(from, n)?;
    check_position(to, n)?;
    let mut cities = tour.0.clone();
    let city = cities.remove(from - 1);
    cities.insert(to - 1, city);
    Ok(Tour(cities))
}

/// Order crossover with an explicit window of 1-based positions `start..=end`.
///
/// The window is copied from `a`; the remaining positions take the other
/// cities in the order they appear in `b`.
pub fn order_crossover(a: &Tour, b: &Tour, start: usize, end: usize) -> Result<Tour> {
    let n = a.len();
    if b.len() != n {
        return Err(Error::InvalidTour("parents differ in length".into()));
    }
    check_position(start, n)?;
    check_position(end, n)?;
    if start > end {
        return Err(Error::PositionOutOfRange { position: start, n: end });
    }
    let mut kept = vec![false; n];
    for &c in &a.0[start - 1..end] {
        kept[c] = true;
    }
    let mut fill = b.0.iter().copied().filter(|&c| !kept[c]);
    let child = (0..n)
        .map(|pos| {
            if pos + 1 >= start && pos < end {
                a.0[pos]
            } else {
                fill.next().expect("fill cities match open positions")
            }
        })
        .collect();
    Ok(Tour(child))
}

/// Order crossover with a uniformly random window.
pub fn crossover<R: Rng + ?Sized>(a: &Tour, b: &Tour, rng: &mut R) -> Tour {
    let n = a.len();
    if n < 2 {
        return a.clone();
    }
    let (start, end) = random_segment(n, rng);
    order_crossover(a, b, start, end).expect("window is in range")
}

/// Two sorted 1-based positions drawn uniformly from `2..=n`.
pub(crate) fn random_segment<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    let x = rng.gen_range(2..=n);
    let y = rng.gen_range(2..=n);
    (x.min(y), x.max(y))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverOverConfig {
    pub pop_size: usize,
    pub generations: usize,
    /// Probability of picking the inversion partner from the individual itself.
    pub p_random: f64,
}

impl Default for InverOverConfig {
    fn default() -> Self {
        InverOverConfig {
            pop_size: 50,
            generations: 10_000,
            p_random: 0.02,
        }
    }
}

/// One replacement decision of the Inver-over loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InverOverStep {
    pub individual: usize,
    pub parent_length: u64,
    pub offspring_length: u64,
    pub accepted: bool,
}

/// Runs Inver-over from a random population and returns the final population.
pub fn inver_over<R: Rng + ?Sized>(inst: &Instance, cfg: &InverOverConfig, rng: &mut R) -> Vec<Tour> {
    inver_over_observed(inst, cfg, rng, |_| {})
}

/// [`inver_over`] with a hook called at every replacement decision.
pub fn inver_over_observed<R, F>(
    inst: &Instance,
    cfg: &InverOverConfig,
    rng: &mut R,
    mut observe: F,
) -> Vec<Tour>
where
    R: Rng + ?Sized,
    F: FnMut(InverOverStep),
{
    let n = inst.num_cities();
    let pop_size = cfg.pop_size.max(2);
    let mut pop: Vec<Vec<usize>> = (0..pop_size)
        .map(|_| Tour::random(n, rng).0)
        .collect();
    let mut lengths: Vec<u64> = pop.iter().map(|c| cycle_length(inst, c)).collect();
    if n < 4 {
        // every pair of cities is adjacent; no inversion can ever apply
        return pop.iter().map(|c| Tour::from_cycle(c)).collect();
    }

    let mut work = vec![0usize; n];
    let mut pos = vec![0usize; n];
    for _ in 0..cfg.generations {
        for i in 0..pop_size {
            work.copy_from_slice(&pop[i]);
            for (p, &c) in work.iter().enumerate() {
                pos[c] = p;
            }
            let mut len = lengths[i] as i64;
            let mut c = work[rng.gen_range(0..n)];
            loop {
                let partner = if rng.gen::<f64>() < cfg.p_random {
                    let mut other = work[rng.gen_range(0..n - 1)];
                    if other == c {
                        other = work[n - 1];
                    }
                    other
                } else {
                    let mut j = rng.gen_range(0..pop_size - 1);
                    if j >= i {
                        j += 1;
                    }
                    let donor = &pop[j];
                    let at = donor.iter().position(|&x| x == c).expect("donor is a permutation");
                    donor[(at + 1) % n]
                };
                let pc = pos[c];
                let next = work[(pc + 1) % n];
                let prev = work[(pc + n - 1) % n];
                if partner == next || partner == prev {
                    break;
                }
                let pp = pos[partner];
                let after = work[(pp + 1) % n];
                len += inst.dist(c, partner) as i64 + inst.dist(next, after) as i64
                    - inst.dist(c, next) as i64
                    - inst.dist(partner, after) as i64;
                reverse_cyclic(&mut work, &mut pos, (pc + 1) % n, pp);
                c = partner;
            }
            let accepted = len as u64 <= lengths[i];
            observe(InverOverStep {
                individual: i,
                parent_length: lengths[i],
                offspring_length: len as u64,
                accepted,
            });
            if accepted {
                pop[i].copy_from_slice(&work);
                lengths[i] = len as u64;
            }
        }
    }
    pop.iter().map(|c| Tour::from_cycle(c)).collect()
}

/// Reverses the cyclic run of positions `from, from+1, ..., to` (wrapping).
fn reverse_cyclic(cycle: &mut [usize], pos: &mut [usize], from: usize, to: usize) {
    let n = cycle.len();
    let span = (to + n - from) % n + 1;
    let (mut a, mut b) = (from, to);
    for _ in 0..span / 2 {
        cycle.swap(a, b);
        pos[cycle[a]] = a;
        pos[cycle[b]] = b;
        a = (a + 1) % n;
        b = (b + n - 1) % n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{parse_instance, Instance, InstanceData};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tiny4() -> Instance {
        parse_instance(include_str!("../data/tiny4.ttp")).unwrap()
    }

    fn t(cities: &[usize]) -> Tour {
        Tour::from_one_based(cities).unwrap()
    }

    fn line_instance(coords: Vec<(f64, f64)>) -> Instance {
        Instance::new(InstanceData {
            name: "pts".into(),
            knapsack_type: "uncorrelated".into(),
            coords,
            items: vec![],
            capacity: 10,
            min_speed: 0.1,
            max_speed: 1.0,
            renting_ratio: 1.0,
        })
        .unwrap()
    }

    #[test]
    fn tour_lengths() {
        let inst = tiny4();
        assert_eq!(tour_length(&inst, &t(&[1, 2, 3, 4])), 14);
        assert_eq!(tour_length(&inst, &t(&[1, 4, 3, 2])), 14);
        let pair = line_instance(vec![(0.0, 0.0), (7.0, 0.0)]);
        assert_eq!(tour_length(&pair, &Tour::identity(2)), 14);
    }

    #[test]
    fn tour_validation() {
        assert!(Tour::new(vec![1, 0, 2]).is_err());
        assert!(Tour::new(vec![0, 1, 1]).is_err());
        assert!(Tour::new(vec![0, 3, 1]).is_err());
        assert!(Tour::from_one_based(&[1, 0]).is_err());
        assert_eq!(t(&[1, 3, 2]).cities(), &[0, 2, 1]);
    }

    #[test]
    fn two_opt_examples() {
        let base = t(&[1, 2, 3, 4]);
        assert_eq!(two_opt_mutate(&base, 2, 3).unwrap(), t(&[1, 3, 2, 4]));
        assert_eq!(two_opt_mutate(&base, 2, 4).unwrap(), t(&[1, 4, 3, 2]));
        assert_eq!(two_opt_mutate(&base, 3, 3).unwrap(), base);
        assert!(two_opt_mutate(&base, 1, 3).is_err());
        assert!(two_opt_mutate(&base, 2, 5).is_err());
        assert!(two_opt_mutate(&base, 4, 3).is_err());
    }

    #[test]
    fn jump_examples() {
        let base = t(&[1, 2, 3, 4]);
        assert_eq!(jump_mutate(&base, 4, 2).unwrap(), t(&[1, 4, 2, 3]));
        assert_eq!(jump_mutate(&base, 2, 4).unwrap(), t(&[1, 3, 4, 2]));
        assert_eq!(jump_mutate(&base, 3, 3).unwrap(), base);
        assert!(jump_mutate(&base, 1, 3).is_err());
        assert!(jump_mutate(&base, 2, 0).is_err());
    }

    #[test]
    fn order_crossover_example() {
        let a = t(&[1, 2, 3, 4, 5]);
        let b = t(&[1, 5, 4, 3, 2]);
        assert_eq!(order_crossover(&a, &b, 3, 4).unwrap(), t(&[1, 5, 3, 4, 2]));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            assert_eq!(crossover(&a, &a, &mut rng), a);
        }
    }

    #[test]
    fn serde_uses_one_based_cities() {
        let tour = t(&[1, 3, 2, 4]);
        assert_eq!(serde_json::to_string(&tour).unwrap(), "[1,3,2,4]");
        let back: Tour = serde_json::from_str("[1,3,2,4]").unwrap();
        assert_eq!(back, tour);
        assert!(serde_json::from_str::<Tour>("[2,1,3,4]").is_err());
    }

    #[test]
    fn three_city_tours_all_equal_length() {
        let inst = line_instance(vec![(0.0, 0.0), (3.0, 1.0), (1.0, 5.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cfg = InverOverConfig {
            pop_size: 6,
            generations: 20,
            p_random: 0.02,
        };
        let pop = inver_over(&inst, &cfg, &mut rng);
        assert_eq!(pop.len(), 6);
        let l0 = tour_length(&inst, &pop[0]);
        assert!(pop.iter().all(|t| tour_length(&inst, t) == l0));
    }

    #[test]
    fn inver_over_acceptance_is_monotone_and_lengths_are_tracked() {
        let inst = parse_instance(include_str!("../data/eil51_n50_synthetic.ttp")).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cfg = InverOverConfig {
            pop_size: 10,
            generations: 200,
            p_random: 0.02,
        };
        let mut steps = 0usize;
        let mut best_seen = vec![u64::MAX; cfg.pop_size];
        let pop = inver_over_observed(&inst, &cfg, &mut rng, |s| {
            steps += 1;
            assert_eq!(s.accepted, s.offspring_length <= s.parent_length);
            if s.accepted {
                assert!(s.offspring_length <= best_seen[s.individual].min(s.parent_length));
                best_seen[s.individual] = s.offspring_length;
            }
        });
        assert_eq!(steps, 2000);
        for (i, tour) in pop.iter().enumerate() {
            assert!(Tour::new(tour.cities().to_vec()).is_ok());
            // the incrementally tracked length matches a fresh evaluation
            if best_seen[i] != u64::MAX {
                assert_eq!(tour_length(&inst, tour), best_seen[i]);
            }
        }
    }

    #[test]
    fn reverse_cyclic_wraps() {
        let mut cycle = vec![0, 1, 2, 3, 4, 5];
        let mut pos: Vec<usize> = (0..6).collect();
        reverse_cyclic(&mut cycle, &mut pos, 4, 1);
        assert_eq!(cycle, vec![5, 4, 2, 3, 1, 0]);
        for (p, &c) in cycle.iter().enumerate() {
            assert_eq!(pos[c], p);
        }
    }

    fn arb_tour(max_n: usize) -> impl Strategy<Value = Tour> {
        (2..=max_n)
            .prop_flat_map(|n| Just((1..n).collect::<Vec<usize>>()).prop_shuffle())
            .prop_map(|mut rest| {
                rest.insert(0, 0);
                Tour::new(rest).unwrap()
            })
    }

    fn arb_pair(max_n: usize) -> impl Strategy<Value = (Tour, Tour)> {
        (3..=max_n).prop_flat_map(|n| {
            let perm = || Just((1..n).collect::<Vec<usize>>()).prop_shuffle();
            (perm(), perm()).prop_map(|(mut a, mut b)| {
                a.insert(0, 0);
                b.insert(0, 0);
                (Tour::new(a).unwrap(), Tour::new(b).unwrap())
            })
        })
    }

    fn is_valid(t: &Tour) -> bool {
        Tour::new(t.cities().to_vec()).is_ok()
    }

    proptest! {
        #[test]
        fn operators_preserve_tour_invariant((a, b) in arb_pair(12), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = a.len();
            let (i, j) = random_segment(n, &mut rng);
            prop_assert!(is_valid(&two_opt_mutate(&a, i, j).unwrap()));
            let from = rng.gen_range(2..=n);
            let to = rng.gen_range(2..=n);
            prop_assert!(is_valid(&jump_mutate(&a, from, to).unwrap()));
            let child = crossover(&a, &b, &mut rng);
            prop_assert!(is_valid(&child));
        }

        #[test]
        fn crossover_keeps_window_from_first_parent((a, b) in arb_pair(12), x in 2usize..12, y in 2usize..12) {
            let n = a.len();
            let (s, e) = (x.min(y).min(n), x.max(y).min(n));
            let child = order_crossover(&a, &b, s, e).unwrap();
            prop_assert_eq!(&child.cities()[s - 1..e], &a.cities()[s - 1..e]);
            let outside: Vec<usize> = child.cities().iter().enumerate()
                .filter(|(p, _)| *p + 1 < s || *p >= e).map(|(_, &c)| c).collect();
            let expected: Vec<usize> = b.cities().iter().copied()
                .filter(|c| !a.cities()[s - 1..e].contains(c)).collect();
            prop_assert_eq!(outside, expected);
        }

        #[test]
        fn two_opt_is_an_involution(a in arb_tour(12), x in 2usize..12, y in 2usize..12) {
            let n = a.len();
            prop_assume!(n >= 2);
            let (i, j) = (x.min(y).min(n), x.max(y).min(n));
            let once = two_opt_mutate(&a, i, j).unwrap();
            prop_assert_eq!(two_opt_mutate(&once, i, j).unwrap(), a);
        }

        #[test]
        fn length_is_reversal_invariant(a in arb_tour(12), coords in prop::collection::vec((0.0f64..100.0, 0.0f64..100.0), 12)) {
            let inst = line_instance(coords[..a.len()].to_vec());
            prop_assert_eq!(tour_length(&inst, &a), tour_length(&inst, &a.reversed()));
        }

        #[test]
        fn distances_are_symmetric(coords in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 1..10)) {
            let inst = line_instance(coords);
            let n = inst.num_cities();
            for i in 1..=n {
                for j in 1..=n {
                    prop_assert_eq!(inst.distance(i, j).unwrap(), inst.distance(j, i).unwrap());
                }
            }
        }
    }
}
