//! Command-line driver.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use chrono::{NaiveDate, NaiveDateTime};
use clap::{Args, Parser, Subcommand, ValueEnum};
use relaysched_core::feasibility::{check_result, CheckOptions};
use relaysched_core::greedy::{greedy, greedy_n_with, GreedyNOptions};
use relaysched_core::ilp::lp_format::to_lp_string;
use relaysched_core::ilp::{build_model_with, solve_bruteforce, solve_exact, LinearModel, ModelOptions, ProblemKind, SolveOptions};
use relaysched_core::metrics::{delay_cdf, sweep_fairness, MetricsReport};
use relaysched_core::model::{validate_scenario, Scenario, SolveResult, TimeGrid};
use relaysched_core::simulator::{apply_penetration, cost_comparison, recompute_with_backups, PenetrationConfig, Replanner};
use relaysched_core::{extract_contacts, ContactSet, FairnessWeight, Money, ParamSet};
use serde::Serialize;

use crate::bench::{run_bench, BenchConfig};
use crate::deploy::generate_deployment;
use crate::report::{cdf_rows, schedule_rows, to_csv, write_json, write_text, Manifest, MetricsRow, RunReport};
use crate::scenario_file::{load_scenario, save_scenario, ParamsDoc};
use crate::tdrive::{ingest_tdrive, BBox, IngestOptions};

#[derive(Debug, Parser)]
#[command(name = "relaysched", version, about = "Schedule sensor data relays through passing vehicles")]
pub struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "RELAYSCHED_OUT", default_value = "relaysched-out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a scenario file against every invariant.
    Validate(ScenarioArg),
    /// Build a scenario from T-Drive taxi logs.
    Ingest(IngestArgs),
    /// Place sensors uniformly at random in a bounding box.
    Deploy(DeployArgs),
    /// Solve a scheduling problem exactly.
    Solve(SolveArgs),
    /// Run the greedy baseline.
    Greedy(ScenarioArg),
    /// Run greedy with budget recycling.
    Greedyn(GreedyNArgs),
    /// Solve by exhaustive enumeration (small scenarios only).
    Oracle(OracleArgs),
    /// Solve the fairness problem over a grid of weights.
    SweepFairness(SweepArgs),
    /// Simulate vehicles failing to show up.
    Penetration(PenetrationArgs),
    /// Compare relayed throughput with a direct subscription of equal cost.
    CompareBaseline(CompareArgs),
    /// Time greedy and exact solves on synthetic scenarios.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct ScenarioArg {
    #[arg(long)]
    pub scenario: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Problem {
    Cspv,
    Fcspv,
    Dfcspv,
}

impl Problem {
    fn name(self) -> &'static str {
        match self {
            Problem::Cspv => "cspv",
            Problem::Fcspv => "fcspv",
            Problem::Dfcspv => "dfcspv",
        }
    }
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Fairness weight; overrides the scenario's.
    #[arg(long)]
    pub weight: Option<f64>,
    /// Delay bound in seconds; overrides the scenario's.
    #[arg(long)]
    pub delay_bound: Option<f64>,
    /// Relative delay tolerance; overrides the scenario's.
    #[arg(long)]
    pub delay_tolerance: Option<f64>,
    /// At most one sensor per vehicle per slot.
    #[arg(long)]
    pub vehicle_exclusive: bool,
    /// Measure the fairness gap over sensors with contacts only.
    #[arg(long)]
    pub reachable_only: bool,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(value_enum)]
    pub problem: Problem,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub node_limit: Option<u64>,
    /// Also write the model in LP format to this file.
    #[arg(long)]
    pub lp: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, value_enum, default_value = "cspv")]
    pub problem: Problem,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct GreedyNArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Return units handed to excluded vehicles to the sensor buffers.
    #[arg(long)]
    pub reclaim_excluded_units: bool,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// T-Drive log files.
    #[arg(long, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    /// min_lat,min_lon,max_lat,max_lon
    #[arg(long)]
    pub bbox: BBox,
    /// YYYY-MM-DD
    #[arg(long)]
    pub day: NaiveDate,
    /// Time zero, "YYYY-MM-DD HH:MM:SS"; defaults to midnight of --day.
    #[arg(long, value_parser = parse_datetime)]
    pub epoch: Option<NaiveDateTime>,
    /// Horizon in slots; defaults to one day.
    #[arg(long, default_value_t = 86_400)]
    pub horizon: u32,
    /// Fail on malformed lines instead of skipping them.
    #[arg(long)]
    pub strict: bool,
    /// Scenario file to write.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct DeployArgs {
    /// Scenario whose sensors are replaced.
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub bbox: BBox,
    #[arg(long, default_value_t = 10)]
    pub sensors: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Solver {
    Exact,
    Oracle,
    Greedy,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value = "fcspv")]
    pub problem: Problem,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Grid 0, 1/steps, ..., 1.
    #[arg(long, default_value_t = 20)]
    pub steps: u32,
    #[arg(long, value_enum, default_value = "exact")]
    pub solver: Solver,
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub node_limit: Option<u64>,
}

#[derive(Debug, Args)]
pub struct PenetrationArgs {
    #[arg(long, value_enum, default_value = "cspv")]
    pub problem: Problem,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.25, 0.5, 0.75])]
    pub rates: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0, 1, 2, 3, 4])]
    pub seeds: Vec<u64>,
    /// Algorithm for the original plan.
    #[arg(long, value_enum, default_value = "exact")]
    pub planner: Solver,
    /// Algorithm for the replacement plan.
    #[arg(long, value_enum, default_value = "greedy")]
    pub replanner: Solver,
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub node_limit: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Direct subscription price in dollars per MB.
    #[arg(long, default_value_t = 1.0)]
    pub direct_price: f64,
    #[arg(long, value_enum, default_value = "exact")]
    pub planner: Solver,
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub node_limit: Option<u64>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![10, 50, 100])]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub sensors: usize,
    #[arg(long, default_value_t = 1_800)]
    pub horizon: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Per-instance limit for the exact solver, seconds.
    #[arg(long, default_value_t = 10.0)]
    pub time_limit: f64,
}

fn parse_datetime(s: &str) -> Result<NaiveDateTime, String> {
    NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S").map_err(|e| e.to_string())
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit status. Diagnostics go to standard error.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let args = recorded_arguments(&argv);
    match run(&cli, args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

/// Arguments after the program name, without the output directory.
fn recorded_arguments(argv: &[OsString]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in argv.iter().skip(1) {
        let a = a.to_string_lossy().into_owned();
        if skip {
            skip = false;
            continue;
        }
        if a == "--out" {
            skip = true;
            continue;
        }
        if a.starts_with("--out=") {
            continue;
        }
        out.push(a);
    }
    out
}

struct Run<'a> {
    out: &'a Path,
    arguments: Vec<String>,
}

impl Run<'_> {
    fn file(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn manifest(&self, command: &str, seeds: Vec<u64>, params: Option<&ParamSet>) -> anyhow::Result<()> {
        let m = Manifest::new(command, self.arguments.clone(), seeds, params.map(ParamsDoc::from_params));
        write_json(&self.file("manifest.json"), &m)?;
        Ok(())
    }

    fn csv<T: Serialize>(&self, name: &str, rows: &[T]) -> anyhow::Result<()> {
        write_text(&self.file(name), &to_csv(rows)?)?;
        Ok(())
    }

    /// schedule.csv, metrics.csv, delay_cdf.csv and report.json for `r`.
    fn result(&self, algorithm: &str, s: &Scenario, r: &SolveResult) -> anyhow::Result<MetricsReport> {
        let metrics = MetricsReport::of(s, r)?;
        self.csv("schedule.csv", &schedule_rows(s, &r.schedule))?;
        self.csv("metrics.csv", &[MetricsRow::new(algorithm, &metrics)])?;
        self.csv("delay_cdf.csv", &cdf_rows(&delay_cdf(&metrics.per_unit_delays_s)))?;
        write_json(&self.file("report.json"), &RunReport::new(algorithm, s, r, &metrics))?;
        println!(
            "{algorithm}: throughput {} units, gap {}, spend ${}, {} participants, objective {}",
            metrics.throughput_units,
            metrics.fairness_gap_units,
            r.total_spend.to_dollars(),
            metrics.participant_count,
            r.objective_value
        );
        Ok(metrics)
    }
}

fn load_valid(path: &Path) -> anyhow::Result<Scenario> {
    let s = load_scenario(path).with_context(|| format!("reading {}", path.display()))?;
    let violations = validate_scenario(&s);
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
        bail!("{} is invalid: {}", path.display(), list.join(", "));
    }
    Ok(s)
}

fn apply_overrides(s: &mut Scenario, m: &ModelArgs) -> anyhow::Result<()> {
    if let Some(w) = m.weight {
        s.params.fairness_weight = FairnessWeight::from_f64(w)?;
    }
    if let Some(d) = m.delay_bound {
        s.params.delay_bound_s = Some(d);
    }
    if let Some(a) = m.delay_tolerance {
        s.params.delay_tolerance = Some(a);
    }
    Ok(())
}

fn model_options(m: &ModelArgs) -> ModelOptions {
    ModelOptions { vehicle_exclusive: m.vehicle_exclusive, reachable_sensors_only: m.reachable_only, ..ModelOptions::default() }
}

fn prepare(m: &ModelArgs, problem: Problem) -> anyhow::Result<(Scenario, ContactSet, ProblemKind)> {
    let mut s = load_valid(&m.scenario)?;
    apply_overrides(&mut s, m)?;
    let kind = ProblemKind::from_params(problem.name(), &s.params)?;
    let c = extract_contacts(&s);
    Ok((s, c, kind))
}

fn solve_options(time_limit: Option<f64>, node_limit: Option<u64>) -> SolveOptions {
    SolveOptions { time_limit_s: time_limit, node_limit }
}

fn check_options(kind: ProblemKind, exclusive: bool) -> CheckOptions {
    CheckOptions { vehicle_exclusive: exclusive, delay_limit_s: kind.delay().map(|d| d.seconds()) }
}

fn ensure_feasible(s: &Scenario, r: &SolveResult, opts: &CheckOptions) -> anyhow::Result<()> {
    let breaches = check_result(s, r, opts);
    if !breaches.is_empty() {
        bail!("internal error: schedule fails validation: {breaches:?}");
    }
    Ok(())
}

fn plan_with(solver: Solver, s: &Scenario, c: &ContactSet, m: &LinearModel, opts: &SolveOptions) -> anyhow::Result<SolveResult> {
    Ok(match solver {
        Solver::Exact => solve_exact(m, opts)?,
        Solver::Oracle => solve_bruteforce(m)?,
        Solver::Greedy => greedy(s, c),
    })
}

#[derive(Serialize)]
struct SweepCsvRow {
    weight: f64,
    throughput_term: f64,
    gap_term: f64,
    objective: f64,
    throughput_units: u64,
    fairness_gap_units: u64,
    selected: bool,
}

#[derive(Serialize)]
struct PenetrationCsvRow {
    rate: f64,
    seed: u64,
    recomputed: bool,
    planned_units: u64,
    realized_units: u64,
    realized_gap: u64,
    realized_spend_usd: f64,
    no_shows: usize,
}

#[derive(Serialize)]
struct BaselineCsvRow {
    relayed_units: u64,
    spend_usd: f64,
    direct_price_per_mb_usd: f64,
    direct_units: u64,
    ratio: f64,
}

pub fn run(cli: &Cli, arguments: Vec<String>) -> anyhow::Result<()> {
    let out = cli.out.as_path();
    let needs_dir = !matches!(cli.command, Command::Validate(_) | Command::Ingest(_) | Command::Deploy(_));
    if needs_dir {
        std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    }
    let run = Run { out, arguments };

    match &cli.command {
        Command::Validate(a) => {
            let s = load_scenario(&a.scenario).with_context(|| format!("reading {}", a.scenario.display()))?;
            let violations = validate_scenario(&s);
            for v in &violations {
                println!("{v}");
            }
            if !violations.is_empty() {
                bail!("{} violation(s)", violations.len());
            }
            println!(
                "ok: {} vehicles, {} sensors, {} slots, {} contacts",
                s.n_vehicles(),
                s.n_sensors(),
                s.horizon(),
                extract_contacts(&s).len()
            );
        }
        Command::Ingest(a) => {
            let epoch = a.epoch.unwrap_or_else(|| a.day.and_hms_opt(0, 0, 0).expect("midnight exists"));
            let opts = IngestOptions { bbox: a.bbox, day: a.day, epoch, strict: a.strict };
            let got = ingest_tdrive(&a.input, &opts)?;
            for w in &got.warnings {
                eprintln!("warning: {w}");
            }
            let s = Scenario {
                grid: TimeGrid::new(a.horizon),
                vehicles: got.trajectories,
                sensors: Vec::new(),
                params: ParamSet::default(),
            };
            save_scenario(&a.output, &s)?;
            println!("{} vehicles written to {}", s.n_vehicles(), a.output.display());
        }
        Command::Deploy(a) => {
            let mut s = load_scenario(&a.scenario).with_context(|| format!("reading {}", a.scenario.display()))?;
            s.sensors = generate_deployment(&a.bbox, a.sensors, a.seed)?;
            save_scenario(&a.output, &s)?;
            println!("{} sensors written to {}", s.n_sensors(), a.output.display());
        }
        Command::Solve(a) => {
            let (s, c, kind) = prepare(&a.model, a.problem)?;
            let m = build_model_with(&s, &c, kind, &model_options(&a.model))?;
            if let Some(lp) = &a.lp {
                write_text(lp, &to_lp_string(&m))?;
            }
            let r = solve_exact(&m, &solve_options(a.time_limit, a.node_limit))?;
            ensure_feasible(&s, &r, &check_options(kind, a.model.vehicle_exclusive))?;
            run.result(kind.name(), &s, &r)?;
            if !r.stats.proven_optimal {
                eprintln!("warning: search stopped at a limit; dual bound {}", r.stats.dual_bound);
            }
            run.manifest("solve", vec![], Some(&s.params))?;
        }
        Command::Greedy(a) => {
            let s = load_valid(&a.scenario)?;
            let r = greedy(&s, &extract_contacts(&s));
            ensure_feasible(&s, &r, &check_options(ProblemKind::Cspv, true))?;
            run.result("greedy", &s, &r)?;
            run.manifest("greedy", vec![], Some(&s.params))?;
        }
        Command::Greedyn(a) => {
            let s = load_valid(&a.scenario)?;
            let opts = GreedyNOptions { reclaim_excluded_units: a.reclaim_excluded_units };
            let r = greedy_n_with(&s, &extract_contacts(&s), &opts);
            ensure_feasible(&s, &r, &check_options(ProblemKind::Cspv, true))?;
            run.result("greedyn", &s, &r)?;
            run.manifest("greedyn", vec![], Some(&s.params))?;
        }
        Command::Oracle(a) => {
            let (s, c, kind) = prepare(&a.model, a.problem)?;
            let m = build_model_with(&s, &c, kind, &model_options(&a.model))?;
            let r = solve_bruteforce(&m)?;
            ensure_feasible(&s, &r, &check_options(kind, a.model.vehicle_exclusive))?;
            run.result(&format!("oracle-{}", kind.name()), &s, &r)?;
            run.manifest("oracle", vec![], Some(&s.params))?;
        }
        Command::SweepFairness(a) => {
            if a.problem == Problem::Cspv {
                bail!("sweep-fairness needs fcspv or dfcspv");
            }
            let (s, c, kind) = prepare(&a.model, a.problem)?;
            let opts = solve_options(a.time_limit, a.node_limit);
            let solver = a.solver;
            if solver == Solver::Greedy {
                bail!("sweep-fairness needs an exact solver");
            }
            let out = sweep_fairness(
                &s,
                &c,
                kind,
                &FairnessWeight::grid(a.steps),
                &model_options(&a.model),
                |m| match solver {
                    Solver::Oracle => solve_bruteforce(m),
                    _ => solve_exact(m, &opts),
                },
            )?;
            let rows: Vec<SweepCsvRow> = out
                .rows
                .iter()
                .map(|r| SweepCsvRow {
                    weight: r.weight.as_f64(),
                    throughput_term: r.throughput_term,
                    gap_term: r.gap_term,
                    objective: r.objective,
                    throughput_units: r.result.throughput(),
                    fairness_gap_units: relaysched_core::metrics::fairness_gap(&r.result.schedule, &s),
                    selected: r.weight == out.selected,
                })
                .collect();
            run.csv("sweep.csv", &rows)?;
            let best = out.rows.iter().find(|r| r.weight == out.selected).expect("selected weight has a row");
            let mut s_sel = s.clone();
            s_sel.params.fairness_weight = out.selected;
            run.result(&format!("{}@{}", kind.name(), out.selected), &s_sel, &best.result)?;
            println!("selected weight {}", out.selected);
            run.manifest("sweep-fairness", vec![], Some(&s.params))?;
        }
        Command::Penetration(a) => {
            let (s, c, kind) = prepare(&a.model, a.problem)?;
            for &rate in &a.rates {
                if !(0.0..=1.0).contains(&rate) {
                    bail!("rate {rate} is outside [0, 1]");
                }
            }
            let opts = solve_options(a.time_limit, a.node_limit);
            let m = build_model_with(&s, &c, kind, &model_options(&a.model))?;
            let plan = plan_with(a.planner, &s, &c, &m, &opts)?;
            let replanner = match a.replanner {
                Solver::Greedy => Replanner::Greedy,
                Solver::Exact | Solver::Oracle => Replanner::Exact { kind, options: opts },
            };
            let mut rows = Vec::new();
            for &rate in &a.rates {
                for &seed in &a.seeds {
                    let cfg = PenetrationConfig::new(rate, seed, false)?;
                    let dropped = apply_penetration(&plan, &cfg, &s)?;
                    let re = recompute_with_backups(&dropped, &s, &c, &replanner)?;
                    for (recomputed, o) in [(false, &dropped), (true, &re)] {
                        rows.push(PenetrationCsvRow {
                            rate,
                            seed,
                            recomputed,
                            planned_units: plan.throughput(),
                            realized_units: o.realized_metrics.throughput_units,
                            realized_gap: o.realized_metrics.fairness_gap_units,
                            realized_spend_usd: o.realized_metrics.total_spend.to_dollars(),
                            no_shows: o.no_show_vehicles.len(),
                        });
                    }
                }
            }
            run.csv("penetration.csv", &rows)?;
            println!("{} penetration cells written", rows.len() / 2);
            run.manifest("penetration", a.seeds.clone(), Some(&s.params))?;
        }
        Command::CompareBaseline(a) => {
            let s = load_valid(&a.scenario)?;
            let c = extract_contacts(&s);
            let m = build_model_with(&s, &c, ProblemKind::Cspv, &ModelOptions::default())?;
            let plan = plan_with(a.planner, &s, &c, &m, &solve_options(a.time_limit, a.node_limit))?;
            let price = Money::from_dollars(a.direct_price).context("direct price must be finite")?;
            let cmp = cost_comparison(&plan, &s, price)?;
            run.csv(
                "baseline.csv",
                &[BaselineCsvRow {
                    relayed_units: cmp.relayed_units,
                    spend_usd: plan.total_spend.to_dollars(),
                    direct_price_per_mb_usd: a.direct_price,
                    direct_units: cmp.direct_units,
                    ratio: cmp.ratio(),
                }],
            )?;
            println!("relayed {} units, direct {} units, ratio {}", cmp.relayed_units, cmp.direct_units, cmp.ratio());
            run.manifest("compare-baseline", vec![], Some(&s.params))?;
        }
        Command::Bench(a) => {
            let cfg = BenchConfig {
                sizes: a.sizes.clone(),
                n_sensors: a.sensors,
                horizon_s: a.horizon,
                seed: a.seed,
                time_limit_s: a.time_limit,
            };
            let rows = run_bench(&cfg)?;
            for r in &rows {
                println!(
                    "{:>4} trajectories: {} contacts, greedy {:.3} s ({} units), exact {:.3} s ({} units{})",
                    r.n_vehicles,
                    r.contacts,
                    r.greedy_s,
                    r.greedy_units,
                    r.exact_s,
                    r.exact_units,
                    if r.exact_proven_optimal { ", optimal" } else { ", time limit" }
                );
            }
            run.csv("bench.csv", &rows)?;
            run.manifest("bench", vec![a.seed], None)?;
        }
    }
    Ok(())
}
