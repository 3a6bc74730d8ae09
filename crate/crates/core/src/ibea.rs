//! The hybrid indicator-based evolutionary algorithm.
//!
//! Individuals are tours. Each tour's fitness is an indicator of how much its
//! DP front contributes to the surface of the population's fronts, so
//! survivor and parent selection act on whole fronts rather than single
//! solutions.

use std::collections::HashMap;
use std::fmt;
use std::ops::ControlFlow;
use std::sync::Arc;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::front::{hypervolume, merge_into_archive, pareto_filter, IndicatorKind, ObjectivePoint, Surface, SurfaceUnion};
use crate::instance::Instance;
use crate::pwt::{dp_front, DpFront, Packing};
use crate::rng::{stream, Stream};
use crate::tour::{crossover, jump_mutate, random_segment, two_opt_mutate, InverOverConfig, Tour};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionScheme {
    /// Rank-based, exponential law.
    Exp,
    /// Rank-based, inverse quadratic law.
    Iq,
    /// Rank-based, harmonic law.
    Har,
    /// Fitness-proportionate.
    Fps,
    /// Tournament.
    Ts,
    /// Uniform over the best half.
    AsBst,
    /// Uniform over the best and the worst quarter.
    AsExt,
    /// Uniform over the population.
    Uar,
}

impl SelectionScheme {
    pub const ALL: [SelectionScheme; 8] = [
        SelectionScheme::Exp,
        SelectionScheme::Iq,
        SelectionScheme::Har,
        SelectionScheme::Fps,
        SelectionScheme::Ts,
        SelectionScheme::AsBst,
        SelectionScheme::AsExt,
        SelectionScheme::Uar,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SelectionScheme::Exp => "exp",
            SelectionScheme::Iq => "iq",
            SelectionScheme::Har => "har",
            SelectionScheme::Fps => "fps",
            SelectionScheme::Ts => "ts",
            SelectionScheme::AsBst => "as_bst",
            SelectionScheme::AsExt => "as_ext",
            SelectionScheme::Uar => "uar",
        }
    }
}

impl std::str::FromStr for SelectionScheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        SelectionScheme::ALL
            .into_iter()
            .find(|x| x.label() == norm)
            .ok_or_else(|| format!("unknown selection scheme `{s}`"))
    }
}

impl fmt::Display for SelectionScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IbeaConfig {
    /// Population size.
    pub mu: usize,
    /// Number of generations.
    pub generations: usize,
    /// Children per generation; `None` means `mu`.
    pub lambda: Option<usize>,
    pub indicator: IndicatorKind,
    pub selection: SelectionScheme,
    pub crossover_probability: f64,
    /// Probability that a child is mutated by 2OPT rather than JUMP.
    pub two_opt_probability: f64,
    pub tournament_size: usize,
    pub seed: u64,
    /// Score each tour by the merged fronts of both walking directions.
    pub both_orientations: bool,
    /// Recompute indicators after every survivor removal.
    pub recompute_on_removal: bool,
    /// Inver-over generations used to seed the population.
    pub seed_generations: usize,
    pub inver_over_p_random: f64,
    /// Store wall-clock time in the run records (makes records non-reproducible).
    pub record_timing: bool,
}

impl Default for IbeaConfig {
    fn default() -> Self {
        IbeaConfig {
            mu: 50,
            generations: 20_000,
            lambda: None,
            indicator: IndicatorKind::Lhv,
            selection: SelectionScheme::Fps,
            crossover_probability: 0.8,
            two_opt_probability: 0.5,
            tournament_size: 2,
            seed: 0,
            both_orientations: false,
            recompute_on_removal: true,
            seed_generations: 10_000,
            inver_over_p_random: 0.02,
            record_timing: false,
        }
    }
}

impl IbeaConfig {
    pub fn lambda(&self) -> usize {
        self.lambda.unwrap_or(self.mu)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.mu < 2 {
            return bad("mu must be at least 2");
        }
        if self.lambda() < 1 {
            return bad("lambda must be at least 1");
        }
        if self.tournament_size < 1 {
            return bad("tournament size must be at least 1");
        }
        for (name, p) in [
            ("crossover probability", self.crossover_probability),
            ("two-opt probability", self.two_opt_probability),
            ("inver-over random probability", self.inver_over_p_random),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        format!("{}-{}", self.selection, self.indicator)
    }
}

/// DP results cached for one tour.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub forward: DpFront,
    pub reverse: Option<DpFront>,
    /// The points indicators are computed on: the forward front, or the
    /// merge of both directions.
    pub points: Vec<ObjectivePoint>,
}

impl Evaluation {
    pub fn new(inst: &Instance, tour: &Tour, both_orientations: bool) -> Self {
        let forward = dp_front(inst, tour);
        if both_orientations {
            let reverse = dp_front(inst, &tour.reversed());
            let mut all = forward.points.clone();
            all.extend_from_slice(&reverse.points);
            let points = pareto_filter(&all);
            Evaluation {
                forward,
                reverse: Some(reverse),
                points,
            }
        } else {
            let points = forward.points.clone();
            Evaluation {
                forward,
                reverse: None,
                points,
            }
        }
    }

    /// Best reward with the tour and plan achieving it.
    fn best(&self) -> (f64, &Tour, &Packing) {
        let mut best = best_of(&self.forward);
        if let Some(rev) = &self.reverse {
            let other = best_of(rev);
            if other.0 > best.0 {
                best = other;
            }
        }
        best
    }
}

fn best_of(front: &DpFront) -> (f64, &Tour, &Packing) {
    let i = front.points.len() - 1;
    (front.points[i].reward, &front.tour, &front.plans[i])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub tour: Tour,
    pub eval: Arc<Evaluation>,
    pub indicator: f64,
}

impl Individual {
    pub fn new(inst: &Instance, tour: Tour, both_orientations: bool) -> Self {
        let eval = Arc::new(Evaluation::new(inst, &tour, both_orientations));
        Individual {
            tour,
            eval,
            indicator: 0.0,
        }
    }

    pub fn points(&self) -> &[ObjectivePoint] {
        &self.eval.points
    }
}

/// Builds the population surface and stores every individual's indicator.
pub fn compute_indicators(pop: &mut [Individual], kind: IndicatorKind, capacity: u64) -> Surface {
    let surface = Surface::from_point_sets(pop.iter().map(Individual::points));
    let values = surface.indicators(kind, capacity);
    for (ind, v) in pop.iter_mut().zip(values) {
        ind.indicator = v;
    }
    surface
}

/// Removes lowest-indicator individuals (ties uniformly at random) until
/// `mu` remain. With `recompute`, indicators are refreshed on the reduced
/// population after every removal; either way they are current on return.
///
/// Returns the original indices of the removed individuals, in removal order.
pub fn survivor_select<R: Rng + ?Sized>(
    pop: &mut Vec<Individual>,
    mu: usize,
    kind: IndicatorKind,
    capacity: u64,
    recompute: bool,
    rng: &mut R,
) -> Vec<usize> {
    if pop.len() <= mu {
        return Vec::new();
    }
    let union = SurfaceUnion::new(pop.iter().map(Individual::points));
    let mut alive = vec![true; pop.len()];
    let mut values = union.surface(|_| true).indicators(kind, capacity);
    let mut remaining = pop.len();
    let mut removed = Vec::with_capacity(remaining - mu);
    while remaining > mu {
        let min = (0..pop.len())
            .filter(|&i| alive[i])
            .map(|i| values[i])
            .fold(f64::INFINITY, f64::min);
        let tied: Vec<usize> = (0..pop.len())
            .filter(|&i| alive[i] && values[i] == min)
            .collect();
        let victim = *tied.choose(rng).expect("at least one live individual");
        alive[victim] = false;
        removed.push(victim);
        remaining -= 1;
        if recompute {
            values = union.surface(|i| alive[i]).indicators(kind, capacity);
        }
    }
    if !recompute {
        values = union.surface(|i| alive[i]).indicators(kind, capacity);
    }
    let mut i = 0;
    pop.retain_mut(|ind| {
        let keep = alive[i];
        ind.indicator = values[i];
        i += 1;
        keep
    });
    removed
}

/// Closed-form selection probability of each rank (rank 1 first) for the
/// rank-based laws; `None` for the other schemes.
pub fn rank_probabilities(scheme: SelectionScheme, mu: usize) -> Option<Vec<f64>> {
    let law: fn(f64) -> f64 = match scheme {
        SelectionScheme::Exp => |i| 2f64.powf(-i),
        SelectionScheme::Iq => |i| i.powi(-2),
        SelectionScheme::Har => |i| 1.0 / i,
        _ => return None,
    };
    let raw: Vec<f64> = (1..=mu).map(|i| law(i as f64)).collect();
    let total: f64 = raw.iter().sum();
    Some(raw.into_iter().map(|x| x / total).collect())
}

/// Indices of individuals from best to worst indicator, ties in random order.
pub fn rank_order<R: Rng + ?Sized>(indicators: &[f64], rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..indicators.len()).collect();
    order.shuffle(rng);
    order.sort_by(|&a, &b| indicators[b].total_cmp(&indicators[a]));
    order
}

/// Draws `count` parent indices (with replacement) according to `scheme`.
pub fn parent_select<R: Rng + ?Sized>(
    indicators: &[f64],
    scheme: SelectionScheme,
    count: usize,
    tournament_size: usize,
    rng: &mut R,
) -> Vec<usize> {
    let mu = indicators.len();
    assert!(mu > 0, "parent selection needs a non-empty population");
    let uniform = |rng: &mut R| (0..count).map(|_| rng.gen_range(0..mu)).collect::<Vec<_>>();
    match scheme {
        SelectionScheme::Exp | SelectionScheme::Iq | SelectionScheme::Har => {
            let order = rank_order(indicators, rng);
            let probs = rank_probabilities(scheme, mu).expect("rank-based scheme");
            let dist = WeightedIndex::new(&probs).expect("positive rank weights");
            (0..count).map(|_| order[dist.sample(rng)]).collect()
        }
        SelectionScheme::Fps => match WeightedIndex::new(indicators) {
            Ok(dist) => (0..count).map(|_| dist.sample(rng)).collect(),
            // all-zero indicators
            Err(_) => uniform(rng),
        },
        SelectionScheme::Ts => (0..count)
            .map(|_| {
                let entrants: Vec<usize> = (0..tournament_size).map(|_| rng.gen_range(0..mu)).collect();
                let best = entrants
                    .iter()
                    .map(|&i| indicators[i])
                    .fold(f64::NEG_INFINITY, f64::max);
                let winners: Vec<usize> = entrants.into_iter().filter(|&i| indicators[i] == best).collect();
                *winners.choose(rng).expect("tournament has entrants")
            })
            .collect(),
        SelectionScheme::AsBst => {
            let order = rank_order(indicators, rng);
            let pool = &order[..mu.div_ceil(2)];
            (0..count).map(|_| *pool.choose(rng).expect("non-empty")).collect()
        }
        SelectionScheme::AsExt => {
            let order = rank_order(indicators, rng);
            let quarter = mu.div_ceil(4);
            let mut pool: Vec<usize> = order[..quarter].to_vec();
            for &i in &order[mu - quarter..] {
                if !pool.contains(&i) {
                    pool.push(i);
                }
            }
            (0..count).map(|_| *pool.choose(rng).expect("non-empty")).collect()
        }
        SelectionScheme::Uar => uniform(rng),
    }
}

/// Produces one child per consecutive pair of parents: crossover with the
/// configured probability (else a copy of the first parent), then exactly
/// one 2OPT or JUMP mutation.
pub fn mate<R: Rng + ?Sized>(parents: &[&Tour], cfg: &IbeaConfig, rng: &mut R) -> Vec<Tour> {
    parents
        .chunks(2)
        .map(|pair| {
            let first = pair[0];
            let child = match pair.get(1) {
                Some(second) if rng.gen::<f64>() < cfg.crossover_probability => crossover(first, second, rng),
                _ => first.clone(),
            };
            mutate(&child, cfg.two_opt_probability, rng)
        })
        .collect()
}

/// Applies 2OPT with probability `two_opt_probability`, otherwise JUMP.
pub fn mutate<R: Rng + ?Sized>(tour: &Tour, two_opt_probability: f64, rng: &mut R) -> Tour {
    let n = tour.len();
    if n < 2 {
        return tour.clone();
    }
    if rng.gen::<f64>() < two_opt_probability {
        let (i, j) = random_segment(n, rng);
        two_opt_mutate(tour, i, j).expect("segment in range")
    } else {
        let from = rng.gen_range(2..=n);
        let to = rng.gen_range(2..=n);
        jump_mutate(tour, from, to).expect("positions in range")
    }
}

/// Metrics of one generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub generation: usize,
    /// Surface of the population after survivor selection.
    pub surface: Vec<ObjectivePoint>,
    pub surface_hypervolume: f64,
    pub best_reward: f64,
    pub archive_hypervolume: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestSolution {
    pub reward: f64,
    pub weight: u64,
    pub tour: Tour,
    pub plan: Packing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub records: Vec<RunRecord>,
    pub population: Vec<Tour>,
    pub surface: Surface,
    /// Pareto archive of every front point produced during the run.
    pub archive: Vec<ObjectivePoint>,
    pub best: BestSolution,
}

/// Runs the algorithm to completion.
pub fn run_ibea(inst: &Instance, cfg: &IbeaConfig) -> Result<RunResult> {
    run_ibea_with(inst, cfg, |_| ControlFlow::Continue(()))
}

/// Runs the algorithm, handing every generation's record to `on_record`;
/// returning `ControlFlow::Break` stops after that generation.
pub fn run_ibea_with<F>(inst: &Instance, cfg: &IbeaConfig, mut on_record: F) -> Result<RunResult>
where
    F: FnMut(&RunRecord) -> ControlFlow<()>,
{
    cfg.validate()?;
    let clock = Clock::start(cfg.record_timing);
    let capacity = inst.capacity();
    let mut seeding_rng = stream(cfg.seed, Stream::Seeding);
    let mut selection_rng = stream(cfg.seed, Stream::Selection);
    let mut mating_rng = stream(cfg.seed, Stream::Mating);
    let mut survivor_rng = stream(cfg.seed, Stream::Survivors);

    let seeding = InverOverConfig {
        pop_size: cfg.mu,
        generations: cfg.seed_generations,
        p_random: cfg.inver_over_p_random,
    };
    let seeds = crate::tour::inver_over(inst, &seeding, &mut seeding_rng);
    let mut pop = evaluate_tours(inst, seeds, &HashMap::new(), cfg.both_orientations);

    let mut archive = Vec::new();
    let mut best: Option<BestSolution> = None;
    for ind in &pop {
        absorb(&mut archive, &mut best, ind);
    }
    let mut surface = compute_indicators(&mut pop, cfg.indicator, capacity);
    let mut records = Vec::with_capacity(cfg.generations + 1);
    let record = make_record(0, &surface, &archive, &best, capacity, &clock);
    let mut stop = on_record(&record).is_break();
    records.push(record);

    let lambda = cfg.lambda();
    let mut generation = 0;
    while !stop && generation < cfg.generations {
        generation += 1;
        let indicators: Vec<f64> = pop.iter().map(|i| i.indicator).collect();
        let picks = parent_select(&indicators, cfg.selection, 2 * lambda, cfg.tournament_size, &mut selection_rng);
        let parents: Vec<&Tour> = picks.iter().map(|&i| &pop[i].tour).collect();
        let children = mate(&parents, cfg, &mut mating_rng);

        let cache: HashMap<Tour, Arc<Evaluation>> =
            pop.iter().map(|i| (i.tour.clone(), Arc::clone(&i.eval))).collect();
        let children = evaluate_tours(inst, children, &cache, cfg.both_orientations);
        for child in &children {
            absorb(&mut archive, &mut best, child);
        }
        pop.extend(children);
        debug_assert_eq!(pop.len(), cfg.mu + lambda);
        survivor_select(
            &mut pop,
            cfg.mu,
            cfg.indicator,
            capacity,
            cfg.recompute_on_removal,
            &mut survivor_rng,
        );
        debug_assert_eq!(pop.len(), cfg.mu);
        debug_check_cache(inst, &pop, generation);
        surface = Surface::from_point_sets(pop.iter().map(Individual::points));

        let record = make_record(generation, &surface, &archive, &best, capacity, &clock);
        stop = on_record(&record).is_break();
        records.push(record);
    }

    Ok(RunResult {
        records,
        population: pop.into_iter().map(|i| i.tour).collect(),
        surface,
        archive,
        best: best.expect("population is non-empty"),
    })
}

/// DP evaluation of new tours; tours already in `cache` (or repeated within
/// `tours`) are not re-evaluated.
fn evaluate_tours(
    inst: &Instance,
    tours: Vec<Tour>,
    cache: &HashMap<Tour, Arc<Evaluation>>,
    both_orientations: bool,
) -> Vec<Individual> {
    let mut fresh: Vec<Tour> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for t in &tours {
        if !cache.contains_key(t) && seen.insert(t.clone()) {
            fresh.push(t.clone());
        }
    }
    let evaluated = evaluate_all(inst, &fresh, both_orientations);
    let computed: HashMap<Tour, Arc<Evaluation>> = fresh.into_iter().zip(evaluated).collect();
    tours
        .into_iter()
        .map(|tour| {
            let eval = cache
                .get(&tour)
                .or_else(|| computed.get(&tour))
                .map(Arc::clone)
                .expect("every tour was evaluated");
            Individual {
                tour,
                eval,
                indicator: 0.0,
            }
        })
        .collect()
}

#[cfg(feature = "parallel")]
fn evaluate_all(inst: &Instance, tours: &[Tour], both: bool) -> Vec<Arc<Evaluation>> {
    use rayon::prelude::*;
    tours
        .par_iter()
        .map(|t| Arc::new(Evaluation::new(inst, t, both)))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn evaluate_all(inst: &Instance, tours: &[Tour], both: bool) -> Vec<Arc<Evaluation>> {
    tours
        .iter()
        .map(|t| Arc::new(Evaluation::new(inst, t, both)))
        .collect()
}

fn absorb(archive: &mut Vec<ObjectivePoint>, best: &mut Option<BestSolution>, ind: &Individual) {
    merge_into_archive(archive, &ind.eval.points);
    let (reward, tour, plan) = ind.eval.best();
    if best.as_ref().map_or(true, |b| reward > b.reward) {
        let weight = ind.eval.points.iter().rev().find(|p| p.reward == reward).map_or(0, |p| p.weight);
        *best = Some(BestSolution {
            reward,
            weight,
            tour: tour.clone(),
            plan: plan.clone(),
        });
    }
}

fn make_record(
    generation: usize,
    surface: &Surface,
    archive: &[ObjectivePoint],
    best: &Option<BestSolution>,
    capacity: u64,
    clock: &Clock,
) -> RunRecord {
    RunRecord {
        generation,
        surface: surface.points().to_vec(),
        surface_hypervolume: surface.hypervolume(capacity),
        best_reward: best.as_ref().map_or(f64::NEG_INFINITY, |b| b.reward),
        archive_hypervolume: hypervolume(archive, capacity),
        wall_time_ms: clock.elapsed_ms(),
    }
}

#[cfg(debug_assertions)]
fn debug_check_cache(inst: &Instance, pop: &[Individual], generation: usize) {
    let ind = &pop[generation % pop.len()];
    debug_assert_eq!(
        crate::pwt::dp_points(inst, &ind.tour),
        ind.eval.forward.points,
        "cached DP front is stale"
    );
}

#[cfg(not(debug_assertions))]
fn debug_check_cache(_: &Instance, _: &[Individual], _: usize) {}

struct Clock(Option<std::time::Instant>);

impl Clock {
    fn start(enabled: bool) -> Self {
        Clock(enabled.then(std::time::Instant::now))
    }

    fn elapsed_ms(&self) -> Option<u64> {
        self.0.map(|t| t.elapsed().as_millis() as u64)
    }
}
