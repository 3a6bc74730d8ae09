//! Packing-while-travelling: exact reward evaluation for a fixed tour and the
//! dynamic program that yields the complete non-dominated front of packings.
//!
//! Items are processed in tour order (ties by item index). Each DP column
//! maps an accumulated weight to the best reward reachable with that weight,
//! charging the whole tour's travel cost as if no later item were taken.
//! Taking item `k` at tour position `i` moves the weight from `w - w_k` to
//! `w` on every leg from `i` onward, so the column update only adds the cost
//! difference on that suffix. After each update the column is cut down to its
//! strictly increasing staircase: a heavier cell with no better reward can
//! never lead to a non-dominated packing, because later items are charged
//! more the heavier the knapsack already is.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::front::ObjectivePoint;
use crate::instance::Instance;
use crate::tour::Tour;

/// Largest item count [`brute_force_front`] will enumerate.
pub const BRUTE_FORCE_MAX_ITEMS: usize = 24;

/// A packing plan as the sorted set of chosen 0-based item indices.
///
/// Serializes as a list of 1-based item numbers.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Packing(Vec<usize>);

impl Packing {
    pub fn empty() -> Self {
        Packing(Vec::new())
    }

    pub fn from_items(mut items: Vec<usize>) -> Self {
        items.sort_unstable();
        items.dedup();
        Packing(items)
    }

    /// Builds a packing from one membership flag per item.
    pub fn from_flags(flags: &[bool]) -> Self {
        Packing(
            flags
                .iter()
                .enumerate()
                .filter_map(|(k, &on)| on.then_some(k))
                .collect(),
        )
    }

    pub fn items(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, item: usize) -> bool {
        self.0.binary_search(&item).is_ok()
    }

    pub fn to_flags(&self, m: usize) -> Vec<bool> {
        let mut flags = vec![false; m];
        for &k in &self.0 {
            flags[k] = true;
        }
        flags
    }

    pub fn weight(&self, inst: &Instance) -> u64 {
        self.0.iter().map(|&k| inst.items()[k].weight).sum()
    }
}

impl Serialize for Packing {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(|k| k + 1))
    }
}

impl<'de> Deserialize<'de> for Packing {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let items = Vec::<usize>::deserialize(d)?;
        if items.contains(&0) {
            return Err(serde::de::Error::custom("item numbers are 1-based"));
        }
        Ok(Packing::from_items(items.into_iter().map(|k| k - 1).collect()))
    }
}

/// Reward and weight of a tour/packing pair.
///
/// Packings heavier than the capacity are evaluated all the same; the caller
/// is responsible for feasibility.
pub fn evaluate(inst: &Instance, tour: &Tour, packing: &Packing) -> ObjectivePoint {
    let cities = tour.cities();
    let n = cities.len();
    let mut carried = vec![0u64; n];
    let mut profit = 0u64;
    for &k in packing.items() {
        let item = inst.items()[k];
        carried[item.node] += item.weight;
        profit += item.profit;
    }
    let mut weight = 0u64;
    let mut time = 0.0;
    for i in 0..n {
        weight += carried[cities[i]];
        let leg = inst.dist(cities[i], cities[(i + 1) % n]);
        time += leg as f64 / inst.velocity(weight);
    }
    ObjectivePoint::new(profit as f64 - inst.renting_ratio() * time, weight)
}

/// The complete set of non-dominated (reward, weight) outcomes of one tour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpFront {
    pub tour: Tour,
    /// Sorted by weight; reward strictly increases along the list.
    pub points: Vec<ObjectivePoint>,
    /// `plans[i]` achieves `points[i]`.
    pub plans: Vec<Packing>,
}

impl DpFront {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn best_reward(&self) -> f64 {
        best_reward(self)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("front serializes")
    }
}

/// Best single-objective reward on the front.
pub fn best_reward(front: &DpFront) -> f64 {
    front
        .points
        .iter()
        .map(|p| p.reward)
        .fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    weight: u64,
    reward: f64,
    took: bool,
    prev_weight: u64,
}

/// Runs the packing DP along `tour`.
pub fn dp_front(inst: &Instance, tour: &Tour) -> DpFront {
    let table = DpTable::build(inst, tour);
    table.into_front(tour.clone())
}

/// Only the front points, skipping plan reconstruction.
pub fn dp_points(inst: &Instance, tour: &Tour) -> Vec<ObjectivePoint> {
    let table = DpTable::build(inst, tour);
    table
        .last()
        .iter()
        .map(|c| ObjectivePoint::new(c.reward, c.weight))
        .collect()
}

struct DpTable {
    base: Cell,
    /// Item processed by each column, in precedence order.
    order: Vec<usize>,
    columns: Vec<Vec<Cell>>,
}

impl DpTable {
    fn build(inst: &Instance, tour: &Tour) -> Self {
        let cities = tour.cities();
        let n = cities.len();
        let capacity = inst.capacity();
        let rent = inst.renting_ratio();

        // remaining[i]: distance from position i back to the depot along the tour
        let mut remaining = vec![0u64; n + 1];
        for i in (0..n).rev() {
            remaining[i] = remaining[i + 1] + inst.dist(cities[i], cities[(i + 1) % n]);
        }

        let base = Cell {
            weight: 0,
            reward: -rent * remaining[0] as f64 / inst.max_speed(),
            took: false,
            prev_weight: 0,
        };

        let mut order = Vec::with_capacity(inst.num_items());
        let mut columns: Vec<Vec<Cell>> = Vec::with_capacity(inst.num_items());
        let mut keep = Vec::new();
        let mut take = Vec::new();
        for (i, &city) in cities.iter().enumerate() {
            let suffix = remaining[i] as f64;
            for &k in inst.items_at(city) {
                let item = inst.items()[k];
                let prev: &[Cell] = columns.last().map_or(std::slice::from_ref(&base), Vec::as_slice);

                keep.clear();
                keep.extend(prev.iter().map(|c| Cell {
                    took: false,
                    prev_weight: c.weight,
                    ..*c
                }));
                take.clear();
                for c in prev {
                    let weight = c.weight + item.weight;
                    if weight > capacity {
                        break;
                    }
                    let extra = suffix / inst.velocity(weight) - suffix / inst.velocity(c.weight);
                    take.push(Cell {
                        weight,
                        reward: c.reward + item.profit as f64 - rent * extra,
                        took: true,
                        prev_weight: c.weight,
                    });
                }
                columns.push(merge_staircase(&keep, &take));
                order.push(k);
            }
        }
        DpTable {
            base,
            order,
            columns,
        }
    }

    fn last(&self) -> &[Cell] {
        self.columns
            .last()
            .map_or(std::slice::from_ref(&self.base), Vec::as_slice)
    }

    fn into_front(self, tour: Tour) -> DpFront {
        let last = self.last();
        let points = last
            .iter()
            .map(|c| ObjectivePoint::new(c.reward, c.weight))
            .collect();
        let plans = last.iter().map(|c| self.plan_for(c.weight)).collect();
        DpFront {
            tour,
            points,
            plans,
        }
    }

    fn plan_for(&self, mut weight: u64) -> Packing {
        let mut items = Vec::new();
        for (col, &k) in self.columns.iter().zip(&self.order).rev() {
            let at = col
                .binary_search_by_key(&weight, |c| c.weight)
                .expect("back-link points at a surviving cell");
            let cell = col[at];
            if cell.took {
                items.push(k);
            }
            weight = cell.prev_weight;
        }
        Packing::from_items(items)
    }
}

/// Merges two weight-sorted cell lists and keeps the strictly increasing
/// reward staircase. On equal weight the larger reward wins; exact ties
/// keep the cell from `keep`.
fn merge_staircase(keep: &[Cell], take: &[Cell]) -> Vec<Cell> {
    let mut out: Vec<Cell> = Vec::with_capacity(keep.len() + take.len());
    let (mut a, mut b) = (0, 0);
    while a < keep.len() || b < take.len() {
        let cell = match (keep.get(a), take.get(b)) {
            (Some(x), Some(y)) if x.weight < y.weight => {
                a += 1;
                *x
            }
            (Some(x), Some(y)) if y.weight < x.weight => {
                b += 1;
                *y
            }
            (Some(x), Some(y)) => {
                a += 1;
                b += 1;
                if y.reward > x.reward {
                    *y
                } else {
                    *x
                }
            }
            (Some(x), None) => {
                a += 1;
                *x
            }
            (None, Some(y)) => {
                b += 1;
                *y
            }
            (None, None) => unreachable!(),
        };
        if out.last().map_or(true, |last| cell.reward > last.reward) {
            out.push(cell);
        }
    }
    out
}

/// Enumerates every feasible packing and keeps the non-dominated ones.
///
/// Independent of the DP; meant as a test oracle for small item counts.
pub fn brute_force_front(inst: &Instance, tour: &Tour) -> Result<DpFront> {
    let m = inst.num_items();
    if m > BRUTE_FORCE_MAX_ITEMS {
        return Err(Error::TooManyItems(m));
    }
    let mut candidates: Vec<(ObjectivePoint, u32)> = Vec::new();
    for mask in 0u32..(1u32 << m) {
        let weight: u64 = (0..m)
            .filter(|k| mask >> k & 1 == 1)
            .map(|k| inst.items()[k].weight)
            .sum();
        if weight > inst.capacity() {
            continue;
        }
        let packing = mask_packing(mask, m);
        candidates.push((evaluate(inst, tour, &packing), mask));
    }
    candidates.sort_by(|(p, ma), (q, mb)| {
        p.weight
            .cmp(&q.weight)
            .then(q.reward.total_cmp(&p.reward))
            .then(ma.cmp(mb))
    });
    let mut points = Vec::new();
    let mut plans = Vec::new();
    for (p, mask) in candidates {
        if points.last().map_or(true, |last: &ObjectivePoint| p.reward > last.reward) {
            points.push(p);
            plans.push(mask_packing(mask, m));
        }
    }
    Ok(DpFront {
        tour: tour.clone(),
        points,
        plans,
    })
}

fn mask_packing(mask: u32, m: usize) -> Packing {
    Packing((0..m).filter(|k| mask >> k & 1 == 1).collect())
}
