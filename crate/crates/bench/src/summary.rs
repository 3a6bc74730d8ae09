//! Cross-configuration comparison: per-instance statistics and the log-p
//! measure of each configuration against the baseline selection scheme.

use std::collections::{BTreeMap, BTreeSet};

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};
use ttp_core::{IndicatorKind, SelectionScheme};

use crate::experiment::RunSet;
use crate::stats::{self, StatsError, WelchTest};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricCell {
    pub mean: f64,
    pub max: f64,
    pub sd: Option<f64>,
    /// Welch test against the baseline (`None` when undefined).
    pub t: Option<f64>,
    pub p: Option<f64>,
    /// `-log10(p)`, negative when the baseline's mean is larger.
    pub log_p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigRow {
    pub label: String,
    pub selection: SelectionScheme,
    pub indicator: IndicatorKind,
    pub repetitions: usize,
    pub hypervolume: MetricCell,
    pub reward: MetricCell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceTable {
    pub instance: String,
    pub configs: Vec<ConfigRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogPMean {
    pub label: String,
    pub hypervolume: Option<f64>,
    pub reward: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub baseline: SelectionScheme,
    pub instances: Vec<InstanceTable>,
    /// Mean log-p measure of each configuration over all instances.
    pub log_p_means: Vec<LogPMean>,
}

struct Sample {
    selection: SelectionScheme,
    indicator: IndicatorKind,
    hypervolume: Vec<f64>,
    reward: Vec<f64>,
}

/// Compares every configuration with the run of `baseline` selection that
/// uses the same indicator on the same instance.
pub fn summarize(sets: &[RunSet], baseline: SelectionScheme) -> Result<SummaryTable> {
    let mut by_instance: BTreeMap<String, BTreeMap<(IndicatorKind, usize), Sample>> = BTreeMap::new();
    for set in sets {
        let cfg = &set.summary.config;
        let order = SelectionScheme::ALL.iter().position(|&s| s == cfg.selection).expect("listed");
        let key = (cfg.indicator, order);
        let slot = by_instance.entry(set.summary.instance.clone()).or_default();
        if slot.contains_key(&key) {
            bail!("configuration {} appears twice for instance {}", cfg.label(), set.summary.instance);
        }
        slot.insert(
            key,
            Sample {
                selection: cfg.selection,
                indicator: cfg.indicator,
                hypervolume: set.hypervolumes(),
                reward: set.rewards(),
            },
        );
    }

    let labels_of = |m: &BTreeMap<(IndicatorKind, usize), Sample>| -> BTreeSet<(IndicatorKind, usize)> {
        m.keys().copied().collect()
    };
    if by_instance.is_empty() {
        bail!("no run directories given");
    }
    let expected: BTreeSet<_> = by_instance.values().flat_map(labels_of).collect();
    if expected.len() < 2 {
        bail!("need at least two configurations to compare");
    }
    for (name, m) in &by_instance {
        if labels_of(m) != expected {
            bail!("instance {name} was run with a different set of configurations");
        }
    }

    let mut instances = Vec::new();
    for (name, samples) in &by_instance {
        let mut configs = Vec::new();
        for s in samples.values() {
            let base_key = (s.indicator, SelectionScheme::ALL.iter().position(|&x| x == baseline).expect("listed"));
            let Some(base) = samples.get(&base_key) else {
                bail!("instance {name}: no {baseline} baseline for indicator {}", s.indicator);
            };
            configs.push(ConfigRow {
                label: format!("{}-{}", s.selection, s.indicator),
                selection: s.selection,
                indicator: s.indicator,
                repetitions: s.reward.len(),
                hypervolume: cell(&s.hypervolume, &base.hypervolume),
                reward: cell(&s.reward, &base.reward),
            });
        }
        instances.push(InstanceTable {
            instance: name.clone(),
            configs,
        });
    }

    let log_p_means = (0..expected.len())
        .map(|c| {
            let mean_of = |f: &dyn Fn(&ConfigRow) -> Option<f64>| -> Option<f64> {
                let vals: Option<Vec<f64>> = instances.iter().map(|t| f(&t.configs[c])).collect();
                vals.map(|v| stats::mean(&v))
            };
            LogPMean {
                label: instances[0].configs[c].label.clone(),
                hypervolume: mean_of(&|r| r.hypervolume.log_p),
                reward: mean_of(&|r| r.reward.log_p),
            }
        })
        .collect();

    Ok(SummaryTable {
        baseline,
        instances,
        log_p_means,
    })
}

fn cell(xs: &[f64], base: &[f64]) -> MetricCell {
    let (mean, base_mean) = (stats::mean(xs), stats::mean(base));
    let test = stats::welch_t_test(xs, base);
    let (t, p, log_p) = match test {
        Ok(WelchTest { t, p, .. }) => (Some(t), Some(p), Some(stats::log_p_measure(p, mean, base_mean))),
        // constant samples: identical means are indistinguishable, distinct ones are not testable
        Err(StatsError::ZeroVariance) if mean == base_mean => {
            (Some(0.0), Some(1.0), Some(0.0))
        }
        Err(_) => (None, None, None),
    };
    MetricCell {
        mean,
        max: stats::max(xs),
        sd: stats::std_dev(xs),
        t,
        p,
        log_p,
    }
}
