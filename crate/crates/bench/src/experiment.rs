//! Repeated runs of the algorithm and their on-disk records.
//!
//! A run directory holds `rep_NNN.jsonl` (one run record per line, one file
//! per repetition) and `summary.json`.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use ttp_core::ibea::BestSolution;
use ttp_core::{parse_instance, run_ibea_with, IbeaConfig, Instance, RunRecord};

use crate::config::ExperimentConfig;
use crate::stats;

pub const SUMMARY_FILE: &str = "summary.json";

pub fn record_file_name(rep: usize) -> String {
    format!("rep_{rep:03}.jsonl")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Repetition {
    pub seed: u64,
    pub records: String,
    /// Surface hypervolume of the final population.
    pub hypervolume: f64,
    /// Best reward ever archived.
    pub reward: f64,
    pub archive_hypervolume: f64,
    pub best_tour: Vec<usize>,
    pub best_plan: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricStats {
    pub mean: f64,
    pub max: f64,
    pub sd: Option<f64>,
}

impl MetricStats {
    pub fn of(xs: &[f64]) -> Self {
        MetricStats {
            mean: stats::mean(xs),
            max: stats::max(xs),
            sd: stats::std_dev(xs),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub label: String,
    pub instance: String,
    pub config: IbeaConfig,
    pub repetitions: Vec<Repetition>,
    pub hypervolume: MetricStats,
    pub reward: MetricStats,
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read instance {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("invalid instance {}", path.display()))
}

/// Runs every repetition (seeds `seed`, `seed + 1`, ...) and writes the
/// record files and the summary into the output directory.
pub fn run_experiment(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<RunSummary> {
    cfg.validate()?;
    let inst = load_instance(&cfg.instance)?;
    fs::create_dir_all(&cfg.output)
        .with_context(|| format!("cannot create output directory {}", cfg.output.display()))?;

    let run_one = |rep: usize| run_repetition(&inst, &cfg.algorithm, rep, &cfg.output);
    let reps: Vec<Repetition> = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("cannot start worker pool")?
            .install(|| (0..cfg.repetitions).into_par_iter().map(run_one).collect::<Result<_>>())?,
        None => (0..cfg.repetitions).into_par_iter().map(run_one).collect::<Result<_>>()?,
    };

    let summary = summarize_repetitions(&cfg.algorithm, inst.name(), reps);
    let json = serde_json::to_string_pretty(&summary)?;
    fs::write(cfg.output.join(SUMMARY_FILE), json + "\n")?;
    Ok(summary)
}

fn run_repetition(inst: &Instance, base: &IbeaConfig, rep: usize, dir: &Path) -> Result<Repetition> {
    let cfg = IbeaConfig {
        seed: base.seed.wrapping_add(rep as u64),
        ..base.clone()
    };
    let name = record_file_name(rep);
    let path = dir.join(&name);
    let file = fs::File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut out = BufWriter::new(file);
    let mut failure = None;
    let result = run_ibea_with(inst, &cfg, |record| {
        let line = serde_json::to_string(record).expect("record serializes");
        match writeln!(out, "{line}") {
            Ok(()) => std::ops::ControlFlow::Continue(()),
            Err(e) => {
                failure = Some(e);
                std::ops::ControlFlow::Break(())
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e).with_context(|| format!("cannot write {}", path.display()));
    }
    out.flush()?;
    let last = result.records.last().expect("a run has at least one record");
    let BestSolution { tour, plan, .. } = &result.best;
    Ok(Repetition {
        seed: cfg.seed,
        records: name,
        hypervolume: last.surface_hypervolume,
        reward: last.best_reward,
        archive_hypervolume: last.archive_hypervolume,
        best_tour: tour.to_one_based(),
        best_plan: plan.items().iter().map(|k| k + 1).collect(),
    })
}

fn summarize_repetitions(cfg: &IbeaConfig, instance: &str, reps: Vec<Repetition>) -> RunSummary {
    let hv: Vec<f64> = reps.iter().map(|r| r.hypervolume).collect();
    let rw: Vec<f64> = reps.iter().map(|r| r.reward).collect();
    RunSummary {
        label: cfg.label(),
        instance: instance.to_string(),
        config: cfg.clone(),
        repetitions: reps,
        hypervolume: MetricStats::of(&hv),
        reward: MetricStats::of(&rw),
    }
}

pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    let file = fs::File::open(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line)
            .with_context(|| format!("{}:{}: malformed run record", path.display(), i + 1))?;
        records.push(record);
    }
    Ok(records)
}

/// A run directory read back from disk.
#[derive(Debug, Clone)]
pub struct RunSet {
    pub dir: PathBuf,
    pub summary: RunSummary,
    /// Records of each repetition, in repetition order.
    pub records: Vec<Vec<RunRecord>>,
}

impl RunSet {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(SUMMARY_FILE);
        let text = fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
        let summary: RunSummary =
            serde_json::from_str(&text).with_context(|| format!("malformed {}", path.display()))?;
        let records = summary
            .repetitions
            .iter()
            .map(|r| read_records(&dir.join(&r.records)))
            .collect::<Result<Vec<_>>>()?;
        if records.iter().any(Vec::is_empty) {
            bail!("{}: empty record file", dir.display());
        }
        Ok(RunSet {
            dir: dir.to_owned(),
            summary,
            records,
        })
    }

    /// Final surface hypervolume of each repetition, from the record files.
    pub fn hypervolumes(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.last().expect("non-empty").surface_hypervolume).collect()
    }

    /// Best archived reward of each repetition, from the record files.
    pub fn rewards(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.last().expect("non-empty").best_reward).collect()
    }
}
