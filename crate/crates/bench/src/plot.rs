//! CSV data behind front scatter plots, convergence curves and box plots.
//!
//! Every real number is written with 9 significant digits.

use std::fmt::Write;

use ttp_core::format::sig9;
use ttp_core::pwt::DpFront;

use crate::experiment::RunSet;
use crate::stats::box_summary;

pub const FRONTS_HEADER: &str = "reward,weight,front_id";
pub const CONVERGENCE_HEADER: &str = "label,instance,repetition,generation,surface_hypervolume,best_reward,archive_hypervolume";
pub const BOXPLOT_HEADER: &str = "label,instance,metric,n,median,q1,q3,whisker_low,whisker_high,outliers";

/// One row per front point; fronts are numbered in the given order.
pub fn fronts_csv(fronts: &[DpFront]) -> String {
    let mut out = format!("{FRONTS_HEADER}\n");
    for (id, front) in fronts.iter().enumerate() {
        for p in &front.points {
            writeln!(out, "{},{},{}", sig9(p.reward), p.weight, id).unwrap();
        }
    }
    out
}

/// One row per generation of every repetition.
pub fn convergence_csv(sets: &[RunSet]) -> String {
    let mut out = format!("{CONVERGENCE_HEADER}\n");
    for set in sets {
        for (rep, records) in set.records.iter().enumerate() {
            for r in records {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    set.summary.label,
                    set.summary.instance,
                    rep,
                    r.generation,
                    sig9(r.surface_hypervolume),
                    sig9(r.best_reward),
                    sig9(r.archive_hypervolume)
                )
                .unwrap();
            }
        }
    }
    out
}

/// Box-plot statistics of the final hypervolume and best reward of each run
/// set. Outliers are `;`-separated.
pub fn boxplot_csv(sets: &[RunSet]) -> String {
    let mut out = format!("{BOXPLOT_HEADER}\n");
    for set in sets {
        for (metric, values) in [("hypervolume", set.hypervolumes()), ("reward", set.rewards())] {
            let Some(b) = box_summary(&values) else {
                continue;
            };
            let outliers: Vec<String> = b.outliers.iter().map(|&x| sig9(x)).collect();
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                set.summary.label,
                set.summary.instance,
                metric,
                b.n,
                sig9(b.median),
                sig9(b.q1),
                sig9(b.q3),
                sig9(b.whisker_low),
                sig9(b.whisker_high),
                outliers.join(";")
            )
            .unwrap();
        }
    }
    out
}
