//! Front algebra: Pareto filtering, the surface of a collection of fronts,
//! hypervolume against the `(0, C)` reference, and the LSC/LHV indicators.
//!
//! Reward is maximized and weight minimized throughout. Two points are the
//! same when their weights are equal and their rewards differ by at most
//! [`REWARD_EPS`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::format::sig9;
use crate::pwt::DpFront;

pub const REWARD_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, u64)", into = "(f64, u64)")]
pub struct ObjectivePoint {
    pub reward: f64,
    pub weight: u64,
}

impl ObjectivePoint {
    pub const fn new(reward: f64, weight: u64) -> Self {
        ObjectivePoint { reward, weight }
    }

    pub fn same_as(&self, other: &ObjectivePoint) -> bool {
        self.weight == other.weight && (self.reward - other.reward).abs() <= REWARD_EPS
    }
}

impl From<(f64, u64)> for ObjectivePoint {
    fn from((reward, weight): (f64, u64)) -> Self {
        ObjectivePoint { reward, weight }
    }
}

impl From<ObjectivePoint> for (f64, u64) {
    fn from(p: ObjectivePoint) -> Self {
        (p.reward, p.weight)
    }
}

impl fmt::Display for ObjectivePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.reward, self.weight)
    }
}

/// Weight ascending, then reward descending.
fn staircase_order(a: &ObjectivePoint, b: &ObjectivePoint) -> std::cmp::Ordering {
    a.weight
        .cmp(&b.weight)
        .then(b.reward.total_cmp(&a.reward))
}

/// The non-dominated subset of `points`, duplicates collapsed, sorted by weight.
pub fn pareto_filter(points: &[ObjectivePoint]) -> Vec<ObjectivePoint> {
    let mut sorted = points.to_vec();
    sorted.sort_by(staircase_order);
    let mut out: Vec<ObjectivePoint> = Vec::with_capacity(sorted.len());
    for p in sorted {
        if out.last().map_or(true, |last| p.reward > last.reward + REWARD_EPS) {
            out.push(p);
        }
    }
    out
}

/// Adds `incoming` to a Pareto archive under exact dominance (no tolerance),
/// so the archive's hypervolume and best reward never decrease.
pub fn merge_into_archive(archive: &mut Vec<ObjectivePoint>, incoming: &[ObjectivePoint]) {
    archive.extend_from_slice(incoming);
    archive.sort_by(staircase_order);
    let mut best = f64::NEG_INFINITY;
    archive.retain(|p| {
        let keep = p.reward > best;
        if keep {
            best = p.reward;
        }
        keep
    });
}

/// Area dominated by the points with positive reward and weight below
/// `capacity`, measured from the reference point `(0, capacity)`.
pub fn hypervolume(points: &[ObjectivePoint], capacity: u64) -> f64 {
    let mut qualifying: Vec<ObjectivePoint> = points
        .iter()
        .copied()
        .filter(|p| p.reward > 0.0 && p.weight < capacity)
        .collect();
    qualifying.sort_by(staircase_order);
    let mut area = 0.0;
    let mut height = 0.0f64;
    for (i, p) in qualifying.iter().enumerate() {
        height = height.max(p.reward);
        let right = qualifying.get(i + 1).map_or(capacity, |q| q.weight);
        area += height * (right - p.weight) as f64;
    }
    area
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndicatorKind {
    /// Loss of surface contribution.
    Lsc,
    /// Loss of hypervolume.
    Lhv,
}

impl IndicatorKind {
    pub fn label(self) -> &'static str {
        match self {
            IndicatorKind::Lsc => "lsc",
            IndicatorKind::Lhv => "lhv",
        }
    }
}

impl std::str::FromStr for IndicatorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "lsc" => Ok(IndicatorKind::Lsc),
            "lhv" => Ok(IndicatorKind::Lhv),
            other => Err(format!("unknown indicator `{other}` (expected lsc or lhv)")),
        }
    }
}

impl fmt::Display for IndicatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Pareto front of the union of several fronts, with the ids of the fronts
/// that contain each surface point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Surface {
    points: Vec<ObjectivePoint>,
    contributors: Vec<Vec<usize>>,
    #[serde(skip)]
    num_fronts: usize,
}

impl Surface {
    /// Builds the surface of `fronts`; front ids are positions in the iterator.
    pub fn from_point_sets<'a, I>(fronts: I) -> Self
    where
        I: IntoIterator<Item = &'a [ObjectivePoint]>,
    {
        SurfaceUnion::new(fronts).surface(|_| true)
    }

    pub fn points(&self) -> &[ObjectivePoint] {
        &self.points
    }

    /// Sorted ids of the fronts containing each surface point.
    pub fn contributors(&self) -> &[Vec<usize>] {
        &self.contributors
    }

    pub fn num_fronts(&self) -> usize {
        self.num_fronts
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn hypervolume(&self, capacity: u64) -> f64 {
        hypervolume(&self.points, capacity)
    }

    pub fn best_reward(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.reward)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Indicator value of one member front.
    pub fn indicator(&self, front: usize, kind: IndicatorKind, capacity: u64) -> f64 {
        self.indicators(kind, capacity)[front]
    }

    /// Indicator values of every member front, indexed by front id.
    pub fn indicators(&self, kind: IndicatorKind, capacity: u64) -> Vec<f64> {
        let lsc = self.surface_contributions();
        match kind {
            IndicatorKind::Lsc => lsc,
            IndicatorKind::Lhv => {
                let total = self.hypervolume(capacity);
                if total <= 0.0 {
                    return lsc;
                }
                self.exclusive_hypervolume_losses(capacity)
                    .into_iter()
                    .map(|loss| (loss / total).clamp(0.0, 1.0))
                    .collect()
            }
        }
    }

    /// Share of surface points each front contributes (shared points count
    /// for every contributor).
    fn surface_contributions(&self) -> Vec<f64> {
        let mut counts = vec![0usize; self.num_fronts];
        for ids in &self.contributors {
            for &id in ids {
                counts[id] += 1;
            }
        }
        let total = self.points.len().max(1) as f64;
        counts.into_iter().map(|c| c as f64 / total).collect()
    }

    /// For every front, the hypervolume that disappears when the surface
    /// points contributed by that front alone are removed.
    fn exclusive_hypervolume_losses(&self, capacity: u64) -> Vec<f64> {
        // qualifying points form a contiguous run: rewards increase with weight
        let idx: Vec<usize> = (0..self.points.len())
            .filter(|&i| self.points[i].reward > 0.0 && self.points[i].weight < capacity)
            .collect();
        let owner: Vec<Option<usize>> = idx
            .iter()
            .map(|&i| match self.contributors[i].as_slice() {
                [only] => Some(*only),
                _ => None,
            })
            .collect();
        let mut losses = vec![0.0; self.num_fronts];
        for (q, &i) in idx.iter().enumerate() {
            let Some(f) = owner[q] else { continue };
            let p = self.points[i];
            let right = idx.get(q + 1).map_or(capacity, |&j| self.points[j].weight);
            // the strip falls back to the closest surviving point on its left
            let mut back = q;
            let fallback = loop {
                if back == 0 {
                    break 0.0;
                }
                back -= 1;
                if owner[back] != Some(f) {
                    break self.points[idx[back]].reward;
                }
            };
            losses[f] += (p.reward - fallback) * (right - p.weight) as f64;
        }
        losses
    }

    /// `reward,weight,contributor_count` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("reward,weight,contributor_count\n");
        for (p, ids) in self.points.iter().zip(&self.contributors) {
            s.push_str(&format!("{},{},{}\n", sig9(p.reward), p.weight, ids.len()));
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("surface serializes")
    }
}

/// Builds the surface of a collection of DP fronts.
pub fn surface(fronts: &[DpFront]) -> Surface {
    Surface::from_point_sets(fronts.iter().map(|f| f.points.as_slice()))
}

/// The merged, sorted union of a collection of fronts.
///
/// Re-extracting the surface of any sub-collection is a single linear scan,
/// which survivor selection relies on after every removal.
#[derive(Debug, Clone)]
pub struct SurfaceUnion {
    entries: Vec<(ObjectivePoint, usize)>,
    num_fronts: usize,
}

impl SurfaceUnion {
    pub fn new<'a, I>(fronts: I) -> Self
    where
        I: IntoIterator<Item = &'a [ObjectivePoint]>,
    {
        let mut entries = Vec::new();
        let mut num_fronts = 0;
        for (id, pts) in fronts.into_iter().enumerate() {
            entries.extend(pts.iter().map(|&p| (p, id)));
            num_fronts = id + 1;
        }
        entries.sort_by(|(a, ia), (b, ib)| staircase_order(a, b).then(ia.cmp(ib)));
        SurfaceUnion {
            entries,
            num_fronts,
        }
    }

    pub fn num_fronts(&self) -> usize {
        self.num_fronts
    }

    /// The surface of the fronts for which `alive(id)` holds. Front ids are
    /// kept as in the full union.
    pub fn surface<F: Fn(usize) -> bool>(&self, alive: F) -> Surface {
        let mut points: Vec<ObjectivePoint> = Vec::new();
        let mut contributors: Vec<Vec<usize>> = Vec::new();
        for &(p, id) in &self.entries {
            if !alive(id) {
                continue;
            }
            if let Some(last) = points.last() {
                if last.same_as(&p) {
                    let ids = contributors.last_mut().expect("parallel to points");
                    if !ids.contains(&id) {
                        ids.push(id);
                    }
                    continue;
                }
                if p.reward <= last.reward + REWARD_EPS {
                    continue;
                }
            }
            points.push(p);
            contributors.push(vec![id]);
        }
        Surface {
            points,
            contributors,
            num_fronts: self.num_fronts,
        }
    }
}
