//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Reports for criteria 6, 7, 8 and 10 are written under the cargo target
//! temp directory and regenerated for the determinism check. The process
//! exits 0 even when a criterion fails so the rest of the workspace tests
//! still run; set `ACCEPTANCE_STRICT=1` to exit 1 on any failure.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use divmax_core::bounds::{compute_bounds, power_lambda_max, DEFAULT_EIGEN_TOL};
use divmax_core::exact::{branch_and_bound, enumerate_exact, BnbConfig, DEFAULT_ENUMERATION_LIMIT};
use divmax_core::report::Algorithm;
use divmax_core::rng::stream;
use divmax_core::{apply_flips, diversity_index, Exposure, FlipSet, Graph, Instance, ObjectiveMatrix};
use divmax_harness::bench::{write_csv, write_json};
use divmax_harness::{
    gen_subsetsum, gen_two_community, karate, run_benchmark, BenchRow, DatasetSpec, KSpec, RunConfig, SolveOptions,
};

struct Suite {
    failures: usize,
    out_dir: PathBuf,
}

impl Suite {
    fn record(&mut self, id: u32, name: &str, pass: bool, detail: String, elapsed: Duration) {
        if !pass {
            self.failures += 1;
        }
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("{tag} [{id:>2}] {name}: {detail} ({:.2}s)", elapsed.as_secs_f64());
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let started = Instant::now();
    let v = f();
    (v, started.elapsed())
}

fn random_exposure(r: &mut impl Rng, n: usize) -> Exposure {
    Exposure::from_signs((0..n).map(|_| if r.random::<bool>() { 1 } else { -1 }).collect()).unwrap()
}

fn random_graph(r: &mut impl Rng, n: usize, density: f64, integer: bool) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if r.random::<f64>() < density {
                let w = if integer { r.random_range(1..=3) as f64 } else { r.random_range(-2.0..2.0) };
                edges.push((i, j, w));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

/// Criterion 1: flipping `x` changes the raw index by `4·xᵀPx`.
fn gain_identity(suite: &mut Suite) {
    let (worst, elapsed) = timed(|| {
        let mut worst: f64 = 0.0;
        for seed in 0..1000u64 {
            let mut r = stream(seed, 1);
            let n = r.random_range(1..=50);
            let density = r.random_range(0.05..0.6);
            let g = random_graph(&mut r, n, density, false);
            let s = random_exposure(&mut r, n);
            let p = divmax_core::build_objective(&g, &s).unwrap();
            let nodes: Vec<usize> = (0..n).filter(|_| r.random::<bool>()).collect();
            let x = FlipSet::from_nodes(&p, &vec![0.0; n], &nodes).unwrap();
            let delta = diversity_index(&g, &apply_flips(&s, &x).unwrap()).unwrap() - diversity_index(&g, &s).unwrap();
            let err = (delta - 4.0 * p.quad_form_of(&nodes)).abs() / (1.0 + g.total_abs_weight());
            worst = worst.max(err);
        }
        worst
    });
    suite.record(
        1,
        "gain identity, 1000 instances",
        worst <= 1e-9 && elapsed < Duration::from_secs(10),
        format!("max |Δη - 4xᵀPx| / (1 + Σ|w|) = {worst:.2e}, tolerance 1e-9, limit 10s"),
        elapsed,
    );
}

fn oracle_instances() -> Vec<(Instance, ObjectiveMatrix)> {
    (0..200u64)
        .map(|seed| {
            let mut r = stream(seed, 2);
            let n = r.random_range(1..=16);
            let density = r.random_range(0.15..0.7);
            let g = random_graph(&mut r, n, density, true);
            let s = random_exposure(&mut r, n);
            let k = r.random_range(0..=5) as f64;
            let inst = Instance::with_unit_costs(g, s, k).unwrap();
            let p = inst.objective();
            (inst, p)
        })
        .collect()
}

/// Criteria 2 and 3 share their instances.
fn oracle_and_bounds(suite: &mut Suite) {
    let instances = oracle_instances();
    let (optima, elapsed) = timed(|| {
        let mut mismatches = 0;
        let mut optima = Vec::new();
        for (inst, p) in &instances {
            let e = enumerate_exact(inst, p, DEFAULT_ENUMERATION_LIMIT).unwrap();
            let b = branch_and_bound(inst, p, &BnbConfig::default()).unwrap();
            if e.gain != b.gain || b.proven_optimal != Some(true) {
                mismatches += 1;
            }
            optima.push(e.gain);
        }
        (mismatches, optima)
    });
    let (mismatches, optima) = optima;
    suite.record(
        2,
        "branch_and_bound == enumerate_exact, 200 instances",
        mismatches == 0 && elapsed < Duration::from_secs(60),
        format!("{mismatches} mismatches (exact equality), limit 60s"),
        elapsed,
    );

    let (violations, elapsed) = timed(|| {
        let mut unsound = 0;
        let mut misordered = 0;
        for ((inst, p), opt) in instances.iter().zip(&optima) {
            let r = compute_bounds(inst, p, DEFAULT_EIGEN_TOL).unwrap();
            let slack = 1e-9 * (1.0 + opt.abs());
            unsound += [r.eigen_bound, r.gersh_bound, r.rowsum_bound].iter().filter(|&&b| b + slack < *opt).count();
            if r.eigen_bound > r.gersh_bound + 1e-6 * r.gersh_bound.abs().max(1.0) {
                misordered += 1;
            }
        }
        (unsound, misordered)
    });
    suite.record(
        3,
        "bound soundness and eigen <= gersh, 200 instances",
        violations == (0, 0) && elapsed < Duration::from_secs(30),
        format!("{} bounds below optimum, {} eigen > gersh (1e-6 rel), limit 30s", violations.0, violations.1),
        elapsed,
    );
}

fn subset_sum_dp(items: &[u64], target: u64) -> bool {
    let mut reach = vec![false; target as usize + 1];
    reach[0] = true;
    for &m in items {
        for t in (m as usize..=target as usize).rev() {
            reach[t] |= reach[t - m as usize];
        }
    }
    reach[target as usize]
}

/// Criterion 4.
fn hardness(suite: &mut Suite) {
    let ((bad, yes), elapsed) = timed(|| {
        let mut bad = 0;
        let mut yes = 0;
        for seed in 0..50u64 {
            let mut r = stream(seed, 4);
            let count = r.random_range(1..=12);
            let items: Vec<u64> = (0..count).map(|_| r.random_range(1..=20)).collect();
            let total: u64 = items.iter().sum();
            let target = r.random_range(1..=total);
            let inst = gen_subsetsum(&items, target).unwrap();
            let opt = enumerate_exact(&inst, &inst.objective(), DEFAULT_ENUMERATION_LIMIT).unwrap().gain;
            let expected = if subset_sum_dp(&items, target) { 1.0 } else { 0.0 };
            yes += (expected == 1.0) as usize;
            if opt != expected {
                bad += 1;
            }
        }
        (bad, yes)
    });
    suite.record(
        4,
        "subset-sum reduction vs DP oracle, 50 instances",
        bad == 0 && elapsed < Duration::from_secs(10),
        format!("{bad} mismatches ({yes} yes-instances), limit 10s"),
        elapsed,
    );
}

/// Criterion 5.
fn karate_index(suite: &mut Suite) {
    let (eta, elapsed) = timed(|| karate(0.0).instance.base_index_normalized());
    suite.record(5, "karate faction index", eta == 10.0, format!("index/4 = {eta}, expected 10"), elapsed);
}

fn best(rows: &[BenchRow], algorithm: Algorithm) -> Option<f64> {
    rows.iter()
        .filter(|r| r.algorithm == algorithm.name())
        .filter_map(|r| r.value)
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
}

fn karate_k3_config() -> RunConfig {
    RunConfig {
        datasets: vec![DatasetSpec::Karate],
        algorithms: vec![Algorithm::Enumerate, Algorithm::SGreedy, Algorithm::IGreedy, Algorithm::SdpRelax, Algorithm::Glover],
        ks: vec![KSpec::Fraction(0.1)],
        seeds: (1..=10).collect(),
        record_timing: false,
        options: SolveOptions { iterations: 100, polish: true, ..SolveOptions::default() },
        ..RunConfig::default()
    }
}

fn karate_kn_config() -> RunConfig {
    RunConfig {
        datasets: vec![DatasetSpec::Karate],
        algorithms: vec![Algorithm::IGreedy],
        ks: vec![KSpec::Fraction(1.0)],
        seeds: (1..=5).collect(),
        record_timing: false,
        options: SolveOptions { iterations: 1000, ..SolveOptions::default() },
        ..RunConfig::default()
    }
}

const SCALE_DATASET: &str = "two-community:20000:0.0025:0.0002:1";

fn scale_config() -> RunConfig {
    RunConfig {
        datasets: vec![SCALE_DATASET.parse().unwrap()],
        algorithms: vec![Algorithm::IGreedy, Algorithm::SGreedy],
        ks: vec![KSpec::Absolute(200.0)],
        seeds: vec![1],
        record_timing: false,
        options: SolveOptions { iterations: 10, ..SolveOptions::default() },
        ..RunConfig::default()
    }
}

/// Report files whose bytes criterion 11 compares across reruns.
fn write_reports(suite: &Suite, tag: &str, name: &str, rows: &[BenchRow]) -> Vec<PathBuf> {
    let csv = suite.out_dir.join(format!("{name}.{tag}.csv"));
    let json = suite.out_dir.join(format!("{name}.{tag}.json"));
    std::fs::write(&csv, write_csv(rows)).unwrap();
    std::fs::write(&json, write_json(rows)).unwrap();
    vec![csv, json]
}

/// Criteria 6 and 8 (both read the Karate k = 3 sweep).
fn karate_table(suite: &mut Suite) -> Vec<PathBuf> {
    let (rows, elapsed) = timed(|| run_benchmark(&karate_k3_config()).unwrap());
    let algorithms = [Algorithm::Enumerate, Algorithm::SGreedy, Algorithm::IGreedy, Algorithm::SdpRelax, Algorithm::Glover];
    let values: Vec<(Algorithm, Option<f64>)> = algorithms.iter().map(|&a| (a, best(&rows, a))).collect();
    let all_46 = values.iter().all(|(_, v)| *v == Some(46.0));
    let detail = values
        .iter()
        .map(|(a, v)| format!("{}={}", a.name(), v.map_or("error".into(), |v| format!("{v}"))))
        .collect::<Vec<_>>()
        .join(" ");
    suite.record(
        6,
        "karate k=3 values all 46",
        all_46 && elapsed < Duration::from_secs(300),
        format!("{detail}; expected 46 exactly, limit 300s"),
        elapsed,
    );

    let started = Instant::now();
    let row = |a: Algorithm| rows.iter().find(|r| r.algorithm == a.name() && r.seed == Some(1)).unwrap();
    let within = |b: Option<f64>, target: f64| b.is_some_and(|b| (b - target).abs() <= 0.05 * target);
    let sdp = row(Algorithm::SdpRelax);
    let lp = row(Algorithm::Glover);
    let sdp_residual_ok = sdp.residual.is_some_and(|r| r <= 1e-5);
    let sdp_ok = sdp_residual_ok && (within(sdp.bound_index, 46.43) || within(sdp.bound_gain, 46.43));
    let lp_ok = within(lp.bound_index, 52.28) || within(lp.bound_gain, 52.28);
    suite.record(
        8,
        "karate k=3 relaxation bounds",
        sdp_ok && lp_ok,
        format!(
            "sdp {:.4} (index/4) / {:.4} (gain), residual {:.1e}, target 46.43 ± 5%; glover {:.4} / {:.4}, target 52.28 ± 5%",
            sdp.bound_index.unwrap_or(f64::NAN),
            sdp.bound_gain.unwrap_or(f64::NAN),
            sdp.residual.unwrap_or(f64::NAN),
            lp.bound_index.unwrap_or(f64::NAN),
            lp.bound_gain.unwrap_or(f64::NAN),
        ),
        started.elapsed(),
    );

    budget_diagnostics();
    write_reports(suite, "first", "karate_k3", &rows)
}

/// Informational rows, not criteria: 0.2n on 34 nodes is 6.8, so both 6 and
/// 7 are reported, along with k = 4 and k = 9, where the published Karate
/// values (46 / 46.43 / 52.28 and 56 / 59.13 / 69.05) reappear.
fn budget_diagnostics() {
    let cfg = RunConfig {
        ks: [6.0, 7.0, 4.0, 9.0].map(KSpec::Absolute).to_vec(),
        algorithms: vec![Algorithm::BranchAndBound, Algorithm::SGreedy, Algorithm::IGreedy, Algorithm::SdpRelax, Algorithm::Glover],
        ..karate_k3_config()
    };
    let rows = run_benchmark(&cfg).unwrap();
    for k in [6.0, 7.0, 4.0, 9.0] {
        let at_k: Vec<BenchRow> = rows.iter().filter(|r| r.k == k).cloned().collect();
        let value = |a: Algorithm| best(&at_k, a).map_or("error".into(), |v| format!("{v}"));
        let bound = |a: Algorithm| {
            at_k.iter().find(|r| r.algorithm == a.name()).and_then(|r| r.bound_index).map_or("-".into(), |b| format!("{b:.2}"))
        };
        println!(
            "INFO      karate k={k}: bnb={} s-greedy={} i-greedy={} sdp-relax={} ({}) glover={} ({})",
            value(Algorithm::BranchAndBound),
            value(Algorithm::SGreedy),
            value(Algorithm::IGreedy),
            value(Algorithm::SdpRelax),
            bound(Algorithm::SdpRelax),
            value(Algorithm::Glover),
            bound(Algorithm::Glover),
        );
    }
}

/// Criterion 7.
fn karate_full_budget(suite: &mut Suite) -> Vec<PathBuf> {
    let (rows, elapsed) = timed(|| run_benchmark(&karate_kn_config()).unwrap());
    let greedy = best(&rows, Algorithm::IGreedy).unwrap_or(f64::NAN);

    let inst = karate(34.0).instance;
    let p = inst.objective();
    let cfg = BnbConfig { time_limit: Some(Duration::from_secs(600)), ..BnbConfig::default() };
    let (exact, bnb_elapsed) = timed(|| branch_and_bound(&inst, &p, &cfg));
    let upper = inst.base_index_normalized() + compute_bounds(&inst, &p, DEFAULT_EIGEN_TOL).unwrap().tightest();
    let (pass, detail) = match exact {
        Ok(r) => {
            let v = r.normalized_value();
            (greedy >= 57.0 && v == 61.0, format!("i-greedy best {greedy} (>= 57); branch and bound proved {v} (expected 61)"))
        }
        Err(e) => {
            let incumbent = e.incumbent().map_or(f64::NAN, |r| r.normalized_value());
            let best_found = incumbent.max(greedy);
            (
                greedy >= 57.0 && best_found <= upper + 1e-9,
                format!("i-greedy best {greedy}; branch and bound stopped ({e}), incumbent {incumbent} <= bound {upper}"),
            )
        }
    };
    suite.record(7, "karate k=n", pass, detail, elapsed + bnb_elapsed);
    write_reports(suite, "first", "karate_kn", &rows)
}

/// Criterion 10.
fn scalability(suite: &mut Suite) -> Vec<PathBuf> {
    let inst = gen_two_community(20_000, 0.0025, 0.0002, 1).unwrap().with_budget(200.0).unwrap();
    let p = inst.objective();
    let (ig, elapsed) = timed(|| divmax_core::i_greedy(&inst, &p, &divmax_core::GreedyConfig::new(10, 1)));
    let sg = divmax_core::s_greedy(&inst, &p);
    let feasible = inst.is_feasible(&ig.selection);
    suite.record(
        10,
        "i-greedy on two-community n=20000, k=200, I=10",
        feasible && ig.normalized_value() >= sg.normalized_value() && elapsed < Duration::from_secs(60),
        format!(
            "m = {}, i-greedy {} vs s-greedy {}, feasible {feasible}, limit 60s",
            inst.graph().edge_count(),
            ig.normalized_value(),
            sg.normalized_value()
        ),
        elapsed,
    );
    let rows = run_benchmark(&scale_config()).unwrap();
    write_reports(suite, "first", "two_community_20000", &rows)
}

/// Criterion 11: regenerate every report and compare bytes.
fn determinism(suite: &mut Suite, first: &[PathBuf]) {
    let (same, elapsed) = timed(|| {
        let mut second = Vec::new();
        second.extend(write_reports(suite, "second", "karate_k3", &run_benchmark(&karate_k3_config()).unwrap()));
        second.extend(write_reports(suite, "second", "karate_kn", &run_benchmark(&karate_kn_config()).unwrap()));
        second.extend(write_reports(suite, "second", "two_community_20000", &run_benchmark(&scale_config()).unwrap()));
        first
            .iter()
            .zip(&second)
            .filter(|(a, b)| std::fs::read(a).unwrap() == std::fs::read(b).unwrap())
            .count()
    });
    suite.record(
        11,
        "byte-identical reports on rerun",
        same == first.len(),
        format!("{same}/{} report files identical in {}", first.len(), suite.out_dir.display()),
        elapsed,
    );
}

/// Criterion 9.
fn eigen_estimation(suite: &mut Suite) {
    let (worst, elapsed) = timed(|| {
        let mut worst: f64 = 0.0;
        for seed in 0..100u64 {
            let mut r = stream(seed, 9);
            let n = r.random_range(1..=30);
            let density = r.random_range(0.05..0.5);
            let mut m = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                m[(i, i)] = r.random_range(-3.0..3.0);
                for j in (i + 1)..n {
                    if r.random::<f64>() < density {
                        let v = r.random_range(-2.0..2.0);
                        m[(i, j)] = v;
                        m[(j, i)] = v;
                    }
                }
            }
            let shift = (0..n).map(|i| m.row(i).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0_f64, f64::max);
            let run = power_lambda_max(
                n,
                |v, out| {
                    for (i, o) in out.iter_mut().enumerate() {
                        *o = (0..n).map(|j| m[(i, j)] * v[j]).sum();
                    }
                },
                shift,
                DEFAULT_EIGEN_TOL,
                20_000,
            );
            let exact = SymmetricEigen::new(m).eigenvalues.max();
            worst = worst.max((run.lambda - exact).abs() / (1.0 + exact.abs()));
        }
        worst
    });
    suite.record(
        9,
        "power iteration vs dense eigensolve, 100 matrices",
        worst <= 1e-6 && elapsed < Duration::from_secs(10),
        format!("max |Δλ| / (1 + |λ|) = {worst:.2e}, tolerance 1e-6, limit 10s"),
        elapsed,
    );
}

fn main() {
    let out_dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&out_dir).unwrap();
    let mut suite = Suite { failures: 0, out_dir };

    gain_identity(&mut suite);
    oracle_and_bounds(&mut suite);
    hardness(&mut suite);
    karate_index(&mut suite);
    let mut reports = karate_table(&mut suite);
    reports.extend(karate_full_budget(&mut suite));
    eigen_estimation(&mut suite);
    reports.extend(scalability(&mut suite));
    determinism(&mut suite, &reports);

    println!("acceptance: {} of 11 criteria failed", suite.failures);
    if suite.failures > 0 && std::env::var_os("ACCEPTANCE_STRICT").is_some_and(|v| v == "1") {
        std::process::exit(1);
    }
}
