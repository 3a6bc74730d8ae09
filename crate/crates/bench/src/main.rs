use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use ttp_bench::config::{workers_from_env, ExperimentConfig, WORKERS_ENV};
use ttp_bench::experiment::{load_instance, run_experiment, RunSet};
use ttp_bench::{plot, summary};
use ttp_core::front::Surface;
use ttp_core::tour::{inver_over, InverOverConfig};
use ttp_core::{dp_front, tour_length, IndicatorKind, SelectionScheme, Tour};

#[derive(Parser)]
#[command(name = "ttp-bench", version, about = "Bi-objective travelling thief experiments", args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run repeated experiments and write per-repetition record files.
    Run(RunArgs),
    /// Compare run directories against a baseline selection scheme.
    Summarize(SummarizeArgs),
    /// Write CSV data for front, convergence and box plots.
    Plotdata(PlotArgs),
    /// Print the DP front of one tour as JSON lines.
    Dpfront(DpfrontArgs),
    /// Run Inver-over and print the final population as JSON lines.
    SeedTours(SeedArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    indicator: Option<IndicatorKind>,
    #[arg(long)]
    selection: Option<SelectionScheme>,
    #[arg(long)]
    mu: Option<usize>,
    #[arg(long)]
    lambda: Option<usize>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    seed_generations: Option<usize>,
    #[arg(long)]
    tournament_size: Option<usize>,
    /// Score tours by the fronts of both walking directions.
    #[arg(long)]
    both_orientations: bool,
    /// Store wall-clock time in the records.
    #[arg(long)]
    timing: bool,
    /// Worker threads (defaults to the TTP_WORKERS environment variable).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct SummarizeArgs {
    /// Run directories written by `run`.
    #[arg(required = true)]
    runs: Vec<PathBuf>,
    #[arg(long, default_value = "uar")]
    baseline: SelectionScheme,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    #[command(subcommand)]
    kind: PlotKind,
}

#[derive(Subcommand)]
enum PlotKind {
    /// DP fronts of many tours (both walking directions) and their surface.
    Fronts {
        #[arg(long)]
        instance: PathBuf,
        /// Tours from `seed-tours`; otherwise Inver-over is run here.
        #[arg(long)]
        tours: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 10_000)]
        generations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-generation metrics of every repetition.
    Convergence {
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Box-plot statistics of the final metrics.
    Boxplot {
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct DpfrontArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Comma-separated 1-based cities starting with 1.
    #[arg(long, value_delimiter = ',', required = true)]
    tour: Vec<usize>,
    /// Also print the front of the reversed tour.
    #[arg(long)]
    both: bool,
}

#[derive(Args)]
struct SeedArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 50)]
    pop: usize,
    #[arg(long, default_value_t = 10_000)]
    generations: usize,
    #[arg(long, default_value_t = 0.02)]
    p_random: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize, Deserialize)]
struct SeededTour {
    tour: Tour,
    length: u64,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run(args) => run(args),
        Command::Summarize(args) => {
            let sets = load_sets(&args.runs)?;
            let table = summary::summarize(&sets, args.baseline)?;
            emit(args.out.as_deref(), &(serde_json::to_string_pretty(&table)? + "\n"))
        }
        Command::Plotdata(args) => plotdata(args.kind),
        Command::Dpfront(args) => {
            let inst = load_instance(&args.instance)?;
            let tour = Tour::from_one_based(&args.tour).context("invalid tour")?;
            if tour.len() != inst.num_cities() {
                bail!("tour has {} cities, instance has {}", tour.len(), inst.num_cities());
            }
            let mut out = dp_front(&inst, &tour).to_json_line() + "\n";
            if args.both {
                out += &(dp_front(&inst, &tour.reversed()).to_json_line() + "\n");
            }
            emit(None, &out)
        }
        Command::SeedTours(args) => {
            let inst = load_instance(&args.instance)?;
            if !(0.0..=1.0).contains(&args.p_random) {
                bail!("--p-random must lie in [0, 1]");
            }
            let cfg = InverOverConfig {
                pop_size: args.pop,
                generations: args.generations,
                p_random: args.p_random,
            };
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.seed);
            let mut out = String::new();
            for tour in inver_over(&inst, &cfg, &mut rng) {
                let length = tour_length(&inst, &tour);
                out += &(serde_json::to_string(&SeededTour { tour, length })? + "\n");
            }
            emit(args.out.as_deref(), &out)
        }
    }
}

fn run(args: RunArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            let Some(instance) = args.instance.clone() else {
                bail!("either --config or --instance is required");
            };
            ExperimentConfig::new(instance, PathBuf::from("runs"))
        }
    };
    if let Some(v) = args.instance {
        cfg.instance = v;
    }
    if let Some(v) = args.output {
        cfg.output = v;
    }
    if let Some(v) = args.reps {
        cfg.repetitions = v;
    }
    let a = &mut cfg.algorithm;
    macro_rules! set {
        ($($field:ident = $value:expr),*) => {$(if let Some(v) = $value { a.$field = v; })*};
    }
    set!(
        indicator = args.indicator,
        selection = args.selection,
        mu = args.mu,
        generations = args.generations,
        seed = args.seed,
        seed_generations = args.seed_generations,
        tournament_size = args.tournament_size
    );
    if args.lambda.is_some() {
        a.lambda = args.lambda;
    }
    a.both_orientations |= args.both_orientations;
    a.record_timing |= args.timing;
    cfg.validate()?;

    let workers = match args.workers {
        Some(0) => bail!("--workers must be positive"),
        Some(n) => Some(n),
        None => workers_from_env().with_context(|| format!("reading {WORKERS_ENV}"))?,
    };
    let summary = run_experiment(&cfg, workers)?;
    eprintln!(
        "{} on {}: {} repetitions, best reward mean {:.3} max {:.3}, written to {}",
        summary.label,
        summary.instance,
        summary.repetitions.len(),
        summary.reward.mean,
        summary.reward.max,
        cfg.output.display()
    );
    Ok(())
}

fn plotdata(kind: PlotKind) -> Result<()> {
    match kind {
        PlotKind::Fronts {
            instance,
            tours,
            count,
            generations,
            seed,
            out,
        } => {
            let inst = load_instance(&instance)?;
            let tours = match tours {
                Some(path) => read_tours(&path)?,
                None => {
                    let cfg = InverOverConfig {
                        pop_size: count,
                        generations,
                        ..InverOverConfig::default()
                    };
                    inver_over(&inst, &cfg, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed))
                }
            };
            let mut fronts = Vec::with_capacity(2 * tours.len());
            for t in &tours {
                if t.len() != inst.num_cities() {
                    bail!("tour {t} does not match the instance");
                }
                fronts.push(dp_front(&inst, t));
                fronts.push(dp_front(&inst, &t.reversed()));
            }
            let points = fronts.iter().map(|f| f.points.as_slice());
            let surface = Surface::from_point_sets(points);
            fs::create_dir_all(&out)?;
            fs::write(out.join("fronts.csv"), plot::fronts_csv(&fronts))?;
            fs::write(out.join("surface.csv"), surface.to_csv())?;
            Ok(())
        }
        PlotKind::Convergence { runs, out } => write_file(&out, &plot::convergence_csv(&load_sets(&runs)?)),
        PlotKind::Boxplot { runs, out } => write_file(&out, &plot::boxplot_csv(&load_sets(&runs)?)),
    }
}

fn read_tours(path: &Path) -> Result<Vec<Tour>> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            let seeded: SeededTour =
                serde_json::from_str(l).with_context(|| format!("{}:{}: malformed tour", path.display(), i + 1))?;
            Ok(seeded.tour)
        })
        .collect()
}

fn load_sets(dirs: &[PathBuf]) -> Result<Vec<RunSet>> {
    dirs.iter().map(|d| RunSet::load(d)).collect()
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn emit(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => write_file(p, contents),
        None => Ok(std::io::stdout().lock().write_all(contents.as_bytes())?),
    }
}
