//! Browser bindings: DP fronts of a tour, a short algorithm run, and the
//! surface of a hand-picked set of tours.
//!
//! Every export takes instance text and returns a JSON string.

use serde::Serialize;
use ttp_core::{dp_front, parse_instance, run_ibea, DpFront, IbeaConfig, IndicatorKind, Instance, SelectionScheme, Tour};
use wasm_bindgen::prelude::*;

/// Longest run the page may request.
pub const MAX_GENERATIONS: usize = 5_000;

pub const TINY4: &str = include_str!("../../core/data/tiny4.ttp");
pub const EIL51: &str = include_str!("../../core/data/eil51_n50_synthetic.ttp");

fn instance(text: &str) -> Result<Instance, String> {
    parse_instance(text).map_err(|e| e.to_string())
}

fn parse_tour(text: &str) -> Result<Tour, String> {
    let cities = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().map_err(|_| format!("`{s}` is not a city number")))
        .collect::<Result<Vec<_>, _>>()?;
    Tour::from_one_based(&cities).map_err(|e| e.to_string())
}

fn checked_tour(inst: &Instance, text: &str) -> Result<Tour, String> {
    let tour = parse_tour(text)?;
    if tour.len() != inst.num_cities() {
        return Err(format!("tour has {} cities, instance has {}", tour.len(), inst.num_cities()));
    }
    Ok(tour)
}

#[derive(Serialize)]
struct Fronts {
    forward: DpFront,
    reverse: DpFront,
    length: u64,
}

pub fn fronts_of(instance_text: &str, tour_text: &str) -> Result<String, String> {
    let inst = instance(instance_text)?;
    let tour = checked_tour(&inst, tour_text)?;
    let out = Fronts {
        forward: dp_front(&inst, &tour),
        reverse: dp_front(&inst, &tour.reversed()),
        length: ttp_core::tour_length(&inst, &tour),
    };
    Ok(serde_json::to_string(&out).expect("serializes"))
}

#[derive(Serialize)]
struct Progress {
    generation: usize,
    surface_hypervolume: f64,
    best_reward: f64,
    archive_hypervolume: f64,
}

#[derive(Serialize)]
struct RunOutput {
    progress: Vec<Progress>,
    surface: Vec<ttp_core::ObjectivePoint>,
    best: ttp_core::ibea::BestSolution,
}

pub fn evolve(
    instance_text: &str,
    mu: usize,
    generations: usize,
    indicator: &str,
    selection: &str,
    seed: u64,
) -> Result<String, String> {
    let inst = instance(instance_text)?;
    if generations > MAX_GENERATIONS {
        return Err(format!("at most {MAX_GENERATIONS} generations"));
    }
    let cfg = IbeaConfig {
        mu,
        generations,
        indicator: indicator.parse::<IndicatorKind>()?,
        selection: selection.parse::<SelectionScheme>()?,
        seed,
        seed_generations: 1_000,
        ..IbeaConfig::default()
    };
    let run = run_ibea(&inst, &cfg).map_err(|e| e.to_string())?;
    let out = RunOutput {
        progress: run
            .records
            .iter()
            .map(|r| Progress {
                generation: r.generation,
                surface_hypervolume: r.surface_hypervolume,
                best_reward: r.best_reward,
                archive_hypervolume: r.archive_hypervolume,
            })
            .collect(),
        surface: run.surface.points().to_vec(),
        best: run.best,
    };
    Ok(serde_json::to_string(&out).expect("serializes"))
}

#[derive(Serialize)]
struct SurfaceOutput {
    fronts: Vec<DpFront>,
    surface: ttp_core::Surface,
    hypervolume: f64,
    lsc: Vec<f64>,
    lhv: Vec<f64>,
}

/// Surface of the DP fronts of the given tours, one tour per line.
pub fn surface_of(instance_text: &str, tours_text: &str) -> Result<String, String> {
    let inst = instance(instance_text)?;
    let fronts = tours_text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| checked_tour(&inst, l).map(|t| dp_front(&inst, &t)))
        .collect::<Result<Vec<_>, _>>()?;
    if fronts.is_empty() {
        return Err("no tours given".into());
    }
    let surface = ttp_core::surface(&fronts);
    let cap = inst.capacity();
    let out = SurfaceOutput {
        hypervolume: surface.hypervolume(cap),
        lsc: surface.indicators(IndicatorKind::Lsc, cap),
        lhv: surface.indicators(IndicatorKind::Lhv, cap),
        fronts,
        surface,
    };
    Ok(serde_json::to_string(&out).expect("serializes"))
}

#[wasm_bindgen(js_name = exampleInstance)]
pub fn example_instance(name: &str) -> Result<String, JsError> {
    match name {
        "tiny4" => Ok(TINY4.to_string()),
        "eil51" => Ok(EIL51.to_string()),
        _ => Err(JsError::new(&format!("unknown example `{name}`"))),
    }
}

#[wasm_bindgen(js_name = dpFronts)]
pub fn dp_fronts(instance_text: &str, tour: &str) -> Result<String, JsError> {
    fronts_of(instance_text, tour).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = runIbea)]
pub fn run(
    instance_text: &str,
    mu: usize,
    generations: usize,
    indicator: &str,
    selection: &str,
    seed: u32,
) -> Result<String, JsError> {
    evolve(instance_text, mu, generations, indicator, selection, seed.into()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = surfaceOf)]
pub fn surface_js(instance_text: &str, tours: &str) -> Result<String, JsError> {
    surface_of(instance_text, tours).map_err(|e| JsError::new(&e))
}
