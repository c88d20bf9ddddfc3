//! Config-driven sweeps and their CSV/JSON/markdown reports.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde::Serialize;

use divmax_core::bounds::{compute_bounds, DEFAULT_EIGEN_TOL};
use divmax_core::exact::ExactError;
use divmax_core::glover::{round_lp, solve_glover_relaxation, GloverRelaxation};
use divmax_core::report::Algorithm;
use divmax_core::sdp::{gaussian_round, solve_sdp_relaxation};
use divmax_core::{
    apply_flips, branch_and_bound, enumerate_exact, glover, i_greedy, normalized_index, s_greedy, sdp,
    BnbConfig, BoundReport, GreedyConfig, Instance, ObjectiveMatrix, RoundingConfig, SdpError,
    SdpProblem, SdpSolution, SolverReport,
};

use crate::config::{CostMode, DatasetSpec, OutputFormat, RunConfig, SolveOptions};
use crate::error::{read_file, HarnessError, Result};
use crate::generate::{gen_random_exposure, gen_subsetsum, gen_two_community, karate};
use crate::io::{load_instance, parse_instance, LoadedInstance};

/// Printed at the top of every report.
pub const REPORT_NOTE: &str = "k: a fraction of n resolves to floor(fraction * n). value and bound_index are the \
     diversity index divided by 4 (bound_index = base index + bound_gain). bound_gain, dual_bound, eigen, gersh and \
     rowsum bound the flip gain x'Px.";

/// Rounding settings derived from solver options and a seed.
pub fn rounding_config(opts: &SolveOptions, seed: u64) -> RoundingConfig {
    RoundingConfig {
        polish: opts.polish,
        polish_iterations: opts.iterations,
        ..RoundingConfig::new(opts.samples, seed)
    }
}

/// Runs one algorithm. Deterministic algorithms ignore `seed`.
pub fn solve_one(
    inst: &Instance,
    p: &ObjectiveMatrix,
    algorithm: Algorithm,
    seed: u64,
    opts: &SolveOptions,
) -> Result<SolverReport> {
    Ok(match algorithm {
        Algorithm::Enumerate => enumerate_exact(inst, p, opts.enumeration_limit)?,
        Algorithm::BranchAndBound => {
            let cfg = BnbConfig { bound: opts.bnb_bound, time_limit: opts.time_limit, ..BnbConfig::default() };
            branch_and_bound(inst, p, &cfg)?
        }
        Algorithm::SGreedy => s_greedy(inst, p),
        Algorithm::IGreedy => i_greedy(inst, p, &GreedyConfig::new(opts.iterations, seed)),
        Algorithm::SdpRelax => sdp::sdp_relax(inst, p, &opts.sdp, &rounding_config(opts, seed))?,
        Algorithm::Glover => glover::glover(inst, p, &rounding_config(opts, seed))?,
    })
}

/// Whether an algorithm's output depends on the seed.
pub fn is_randomized(algorithm: Algorithm) -> bool {
    matches!(algorithm, Algorithm::IGreedy | Algorithm::SdpRelax | Algorithm::Glover)
}

/// Checks the budget and recomputes the diversity index from scratch.
/// Returns `(feasible, verified, recomputed value)`.
pub fn verify(inst: &Instance, report: &SolverReport) -> (bool, bool, f64) {
    let feasible = inst.is_feasible(&report.selection);
    let recomputed = apply_flips(inst.exposure(), &report.selection)
        .and_then(|s| normalized_index(inst.graph(), &s))
        .unwrap_or(f64::NAN);
    let tol = 1e-9 * (1.0 + inst.graph().total_abs_weight());
    (feasible, (recomputed - report.normalized_value()).abs() <= tol, recomputed)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub dataset: String,
    pub n: usize,
    pub m: usize,
    /// Budget actually used.
    pub k: f64,
    pub algorithm: String,
    pub seed: Option<u64>,
    pub value: Option<f64>,
    pub gain: Option<f64>,
    pub selected: Option<usize>,
    pub cost: Option<f64>,
    pub bound_index: Option<f64>,
    pub bound_gain: Option<f64>,
    pub dual_bound: Option<f64>,
    pub residual: Option<f64>,
    pub eigen: Option<f64>,
    pub gersh: Option<f64>,
    pub rowsum: Option<f64>,
    pub feasible: bool,
    pub verified: bool,
    pub proven_optimal: Option<bool>,
    pub runtime_ms: Option<f64>,
    pub error: Option<String>,
}

/// A loaded dataset; `native_budget` is set for generators that fix `k`.
pub struct Dataset {
    pub name: String,
    pub loaded: LoadedInstance,
    pub native_budget: Option<f64>,
}

pub fn load_dataset(spec: &DatasetSpec, costs: &CostMode) -> Result<Dataset> {
    let (loaded, native_budget) = match spec {
        DatasetSpec::Karate => (karate(0.0), None),
        DatasetSpec::KarateRandom(seed) => {
            let k = karate(0.0);
            (LoadedInstance { instance: gen_random_exposure(&k.instance, *seed), ids: k.ids }, None)
        }
        DatasetSpec::TwoCommunity { n, p_in, p_out, seed } => {
            (LoadedInstance::with_numeric_ids(gen_two_community(*n, *p_in, *p_out, *seed)?), None)
        }
        DatasetSpec::SubsetSum { items, target } => {
            let inst = gen_subsetsum(items, *target)?;
            let ids = (0..inst.node_count()).map(|i| i.to_string()).collect();
            return Ok(Dataset {
                name: spec.name(),
                native_budget: Some(inst.budget()),
                loaded: LoadedInstance { instance: inst, ids },
            });
        }
        DatasetSpec::Files { edges, exposure, costs: Some(c) } => {
            (load_instance(edges, exposure, Some(c), 0.0)?, None)
        }
        DatasetSpec::Files { edges, exposure, costs: None } => (load_instance(edges, exposure, None, 0.0)?, None),
    };
    let loaded = match (costs, spec) {
        (CostMode::File(path), DatasetSpec::Files { costs: None, .. } | DatasetSpec::Karate
            | DatasetSpec::KarateRandom(_) | DatasetSpec::TwoCommunity { .. }) => {
            let edges = crate::io::format_edges(&loaded);
            let exposure = crate::io::format_exposure(&loaded);
            let cost_text = read_file(path)?;
            let name = path.display().to_string();
            let mut reloaded =
                parse_instance(("edges", &edges), ("exposure", &exposure), Some((&name, &cost_text)), 0.0)?;
            reloaded.ids = loaded.ids;
            reloaded
        }
        _ => loaded,
    };
    Ok(Dataset { name: spec.name(), loaded, native_budget })
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

struct RowContext<'a> {
    dataset: &'a str,
    inst: &'a Instance,
    bounds: Option<&'a BoundReport>,
    record_timing: bool,
}

impl RowContext<'_> {
    fn base(&self, algorithm: Algorithm, seed: Option<u64>) -> BenchRow {
        BenchRow {
            dataset: self.dataset.to_string(),
            n: self.inst.node_count(),
            m: self.inst.graph().edge_count(),
            k: self.inst.budget(),
            algorithm: algorithm.name().to_string(),
            seed,
            value: None,
            gain: None,
            selected: None,
            cost: None,
            bound_index: None,
            bound_gain: None,
            dual_bound: None,
            residual: None,
            eigen: self.bounds.map(|b| b.eigen_bound),
            gersh: self.bounds.map(|b| b.gersh_bound),
            rowsum: self.bounds.map(|b| b.rowsum_bound),
            feasible: false,
            verified: false,
            proven_optimal: None,
            runtime_ms: None,
            error: None,
        }
    }

    fn from_report(&self, report: &SolverReport, seed: Option<u64>, runtime: Duration) -> BenchRow {
        let (feasible, verified, _) = verify(self.inst, report);
        BenchRow {
            value: Some(report.normalized_value()),
            gain: Some(report.gain),
            selected: Some(report.selection.len()),
            cost: Some(report.cost()),
            bound_index: report.normalized_bound(),
            bound_gain: report.relaxation_bound,
            residual: report.residuals.map(|r| r.max()),
            feasible,
            verified,
            proven_optimal: report.proven_optimal,
            runtime_ms: self.record_timing.then(|| ms(runtime)),
            ..self.base(report.algorithm, seed)
        }
    }

    fn from_error(&self, algorithm: Algorithm, seed: Option<u64>, err: &HarnessError) -> BenchRow {
        if let HarnessError::Exact(ExactError::Timeout(report)) = err {
            let mut row = self.from_report(report, seed, report.runtime);
            row.error = Some("timeout".into());
            return row;
        }
        BenchRow { error: Some(err.to_string()), ..self.base(algorithm, seed) }
    }
}

/// Relaxations shared by all seeds of one (dataset, k) pair.
#[derive(Default)]
struct RelaxCache {
    sdp: Option<(std::result::Result<SdpSolution, String>, Duration)>,
    lp: Option<(std::result::Result<GloverRelaxation, String>, Duration)>,
}

impl RelaxCache {
    fn sdp(&mut self, inst: &Instance, p: &ObjectiveMatrix, opts: &SolveOptions) -> &(std::result::Result<SdpSolution, String>, Duration) {
        self.sdp.get_or_insert_with(|| {
            let started = Instant::now();
            let sol = match solve_sdp_relaxation(&SdpProblem::new(inst, p), &opts.sdp) {
                Ok(sol) => Ok(sol),
                Err(SdpError::NonConvergence(sol)) => Ok(*sol),
                Err(e) => Err(HarnessError::Sdp(e).to_string()),
            };
            (sol, started.elapsed())
        })
    }

    fn lp(&mut self, inst: &Instance, p: &ObjectiveMatrix) -> &(std::result::Result<GloverRelaxation, String>, Duration) {
        self.lp.get_or_insert_with(|| {
            let started = Instant::now();
            (solve_glover_relaxation(inst, p).map_err(|e| HarnessError::Lp(e).to_string()), started.elapsed())
        })
    }
}

/// Runs every (dataset, k, algorithm, seed) combination. Deterministic
/// algorithms get one row per (dataset, k) with an empty seed. Solver
/// failures become rows with the `error` column set; only dataset loading
/// aborts the run.
pub fn run_benchmark(cfg: &RunConfig) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    if cfg.algorithms.is_empty() {
        return Ok(rows);
    }
    let opts = &cfg.options;
    for spec in &cfg.datasets {
        let data = load_dataset(spec, &cfg.costs)?;
        let n = data.loaded.instance.node_count();
        let budgets: Vec<f64> = match data.native_budget {
            Some(b) => vec![b],
            None => cfg.ks.iter().map(|k| k.resolve(n)).collect(),
        };
        for budget in budgets {
            let inst = data.loaded.instance.with_budget(budget)?;
            let p = inst.objective();
            let bounds = compute_bounds(&inst, &p, DEFAULT_EIGEN_TOL).ok();
            let ctx = RowContext { dataset: &data.name, inst: &inst, bounds: bounds.as_ref(), record_timing: cfg.record_timing };
            let mut cache = RelaxCache::default();
            for &alg in &cfg.algorithms {
                let seeds: Vec<Option<u64>> =
                    if is_randomized(alg) { cfg.seeds.iter().copied().map(Some).collect() } else { vec![None] };
                for seed in seeds {
                    let s = seed.unwrap_or(0);
                    let row = match alg {
                        Algorithm::SdpRelax => match cache.sdp(&inst, &p, opts) {
                            (Ok(sol), relax_time) => {
                                let report = gaussian_round(sol, &inst, &p, &rounding_config(opts, s));
                                let mut row = ctx.from_report(&report, seed, *relax_time + report.runtime);
                                row.dual_bound = sol.dual_bound;
                                row
                            }
                            (Err(e), _) => BenchRow { error: Some(e.clone()), ..ctx.base(alg, seed) },
                        },
                        Algorithm::Glover => match cache.lp(&inst, &p) {
                            (Ok(relax), relax_time) => {
                                let mut report = round_lp(&relax.x_frac, &inst, &p, &rounding_config(opts, s));
                                report.relaxation_bound = Some(relax.value);
                                ctx.from_report(&report, seed, *relax_time + report.runtime)
                            }
                            (Err(e), _) => BenchRow { error: Some(e.clone()), ..ctx.base(alg, seed) },
                        },
                        _ => {
                            let started = Instant::now();
                            match solve_one(&inst, &p, alg, s, opts) {
                                Ok(report) => ctx.from_report(&report, seed, started.elapsed()),
                                Err(e) => ctx.from_error(alg, seed, &e),
                            }
                        }
                    };
                    rows.push(row);
                }
            }
        }
    }
    Ok(rows)
}

const COLUMNS: [&str; 22] = [
    "dataset", "n", "m", "k", "algorithm", "seed", "value", "gain", "selected", "cost", "bound_index",
    "bound_gain", "dual_bound", "residual", "eigen", "gersh", "rowsum", "feasible", "verified",
    "proven_optimal", "runtime_ms", "error",
];

fn fixed(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| format!("{:.6}", v + 0.0))
}

fn budget_text(k: f64) -> String {
    if k.fract() == 0.0 { format!("{}", k as i64) } else { format!("{k:.6}") }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

fn cells(row: &BenchRow) -> [String; 22] {
    [
        row.dataset.clone(),
        row.n.to_string(),
        row.m.to_string(),
        budget_text(row.k),
        row.algorithm.clone(),
        opt(row.seed),
        fixed(row.value),
        fixed(row.gain),
        opt(row.selected),
        fixed(row.cost),
        fixed(row.bound_index),
        fixed(row.bound_gain),
        fixed(row.dual_bound),
        row.residual.map_or_else(String::new, |r| format!("{r:.3e}")),
        fixed(row.eigen),
        fixed(row.gersh),
        fixed(row.rowsum),
        row.feasible.to_string(),
        row.verified.to_string(),
        opt(row.proven_optimal),
        fixed(row.runtime_ms),
        row.error.clone().unwrap_or_default(),
    ]
}

pub fn write_csv(rows: &[BenchRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COLUMNS).expect("writing to memory");
    for row in rows {
        w.write_record(cells(row)).expect("writing to memory");
    }
    let body = String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv output is utf-8");
    format!("# {REPORT_NOTE}\n{body}")
}

#[derive(Serialize)]
struct JsonReport<'a> {
    note: &'a str,
    rows: &'a [BenchRow],
}

pub fn write_json(rows: &[BenchRow]) -> String {
    let mut out = serde_json::to_string_pretty(&JsonReport { note: REPORT_NOTE, rows }).expect("rows serialize");
    out.push('\n');
    out
}

pub fn write_markdown(rows: &[BenchRow]) -> String {
    let mut out = format!("{REPORT_NOTE}\n\n| {} |\n|", COLUMNS.join(" | "));
    for _ in COLUMNS {
        out.push_str("---|");
    }
    out.push('\n');
    for row in rows {
        let cells = cells(row).map(|c| c.replace('|', "\\|"));
        let _ = writeln!(out, "| {} |", cells.join(" | "));
    }
    out
}

pub fn write_report(rows: &[BenchRow], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => write_csv(rows),
        OutputFormat::Json => write_json(rows),
        OutputFormat::Markdown => write_markdown(rows),
    }
}
