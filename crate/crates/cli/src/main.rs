use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use divmax_core::bounds::{compute_bounds, DEFAULT_EIGEN_TOL};
use divmax_core::glover::{export_lp, glover_program};
use divmax_core::report::Algorithm;
use divmax_core::sdp::{export_sdpa, gaussian_round, import_sdpa_solution};
use divmax_core::{BoundKind, ExactError, FlipSet, SdpProblem, SolverReport};
use divmax_harness::bench::{is_randomized, load_dataset, rounding_config, solve_one, verify, write_report, REPORT_NOTE};
use divmax_harness::error::{read_file, write_file};
use divmax_harness::io::{format_costs, format_edges, format_exposure};
use divmax_harness::profile::{node_profile, selection_order};
use divmax_harness::{
    gen_random_exposure, gen_subsetsum, gen_two_community, karate, load_instance, run_benchmark, CostMode,
    DatasetSpec, HarnessError, KSpec, LoadedInstance, RunConfig, SolveOptions,
};

#[derive(Parser)]
#[command(name = "divmax", version, about = "Exposure-diversity maximization on graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance with one algorithm.
    Solve(SolveArgs),
    /// Print the eigen, Gerschgorin and row-sum upper bounds.
    Bound(BoundArgs),
    /// Write generated instance files.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Run a configured sweep and print a report.
    Bench(BenchArgs),
    /// Profile the nodes a solver selects.
    Profile(ProfileArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// Built-in dataset (karate, karate-d:SEED, two-community:N:P_IN:P_OUT:SEED, subsetsum:M1,M2,..:TARGET).
    #[arg(long, conflicts_with_all = ["edges", "exposure"])]
    dataset: Option<String>,
    /// Edge list: "src dst [weight]" per line.
    #[arg(long, requires = "exposure")]
    edges: Option<PathBuf>,
    /// Exposure file: "id ±1" per line.
    #[arg(long, requires = "edges")]
    exposure: Option<PathBuf>,
    /// Cost file: "id cost" per line; unlisted nodes cost 1.
    #[arg(long)]
    costs: Option<PathBuf>,
    /// Budget, absolute (3) or a fraction of n (0.1n, rounded down).
    /// Ignored by subsetsum datasets, which fix their own budget.
    #[arg(short, long, default_value = "0.1n")]
    k: String,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(short, long, default_value_t = 1)]
    seed: u64,
    /// Local-search rounds for i-greedy and rounding polish.
    #[arg(short = 'I', long, default_value_t = 100)]
    iterations: usize,
    /// Rounding samples for sdp-relax and glover.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Skip local-search polish after rounding.
    #[arg(long)]
    no_polish: bool,
    /// Branch-and-bound pruning bound (eigen, gersh, rowsum, none).
    #[arg(long, default_value = "rowsum")]
    bound: String,
    /// Branch-and-bound time limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TextFormat {
    Text,
    Json,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// enumerate, bnb, s-greedy, i-greedy, sdp-relax or glover.
    #[arg(short, long, default_value = "i-greedy")]
    algorithm: String,
    #[arg(long, value_enum, default_value = "text")]
    format: TextFormat,
    /// Write the SDP relaxation in SDPA sparse format.
    #[arg(long)]
    export_sdpa: Option<PathBuf>,
    /// Write the Glover LP relaxation in LP format.
    #[arg(long)]
    export_lp: Option<PathBuf>,
    /// Only write the export files.
    #[arg(long)]
    export_only: bool,
    /// Round an externally computed SDP solution (CSDP layout) instead of
    /// solving the relaxation.
    #[arg(long)]
    sdpa_solution: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Power-iteration tolerance.
    #[arg(long, default_value_t = DEFAULT_EIGEN_TOL)]
    tol: f64,
    #[arg(long, value_enum, default_value = "text")]
    format: TextFormat,
}

#[derive(Subcommand)]
enum GenCommand {
    /// Two equal communities with exposures +1 and -1.
    TwoCommunity {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p_in: f64,
        #[arg(long)]
        p_out: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output prefix; writes PREFIX.edges and PREFIX.exposure.
        #[arg(long)]
        out: PathBuf,
    },
    /// The embedded karate club, optionally with random exposures.
    Karate {
        #[arg(long)]
        random_exposure: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Resample the exposures of existing instance files.
    RandomExposure {
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        exposure: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Subset-sum reduction; also writes PREFIX.costs and prints the budget.
    Subsetsum {
        /// Item sizes, comma-separated.
        #[arg(long, value_delimiter = ',', required = true)]
        items: Vec<u64>,
        #[arg(long)]
        target: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct BenchArgs {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. --set seeds=1-10.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// csv, json or markdown; overrides the config.
    #[arg(long)]
    format: Option<String>,
    /// Leave the runtime column empty.
    #[arg(long)]
    no_timing: bool,
    /// Write the report here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(short, long, default_value = "i-greedy")]
    algorithm: String,
    /// Profile these node ids instead of running a solver.
    #[arg(long, value_delimiter = ',')]
    nodes: Vec<String>,
    /// Profile only the first N selected nodes.
    #[arg(long)]
    top: Option<usize>,
    #[arg(long, value_enum, default_value = "text")]
    format: TextFormat,
}

fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

/// Loaded instance with its budget resolved, plus a label for reports.
fn resolve_instance(args: &InstanceArgs) -> Result<(String, LoadedInstance, KSpec), HarnessError> {
    let kspec: KSpec = args.k.parse()?;
    let costs = args.costs.clone().map_or(CostMode::Unit, CostMode::File);
    let (name, loaded, native) = match (&args.dataset, &args.edges, &args.exposure) {
        (_, Some(e), Some(x)) => {
            let l = load_instance(e, x, args.costs.as_deref(), 0.0)?;
            let name = e.file_stem().map_or("instance".into(), |s| s.to_string_lossy().into_owned());
            (name, l, None)
        }
        (spec, _, _) => {
            let spec: DatasetSpec = spec.as_deref().unwrap_or("karate").parse()?;
            let d = load_dataset(&spec, &costs)?;
            (d.name, d.loaded, d.native_budget)
        }
    };
    let budget = native.unwrap_or_else(|| kspec.resolve(loaded.instance.node_count()));
    let instance = loaded.instance.with_budget(budget)?;
    Ok((name, LoadedInstance { instance, ids: loaded.ids }, kspec))
}

fn solve_options(args: &SolverArgs) -> Result<SolveOptions, HarnessError> {
    let bnb_bound = match args.bound.as_str() {
        "none" => None,
        b => Some(b.parse::<BoundKind>().map_err(config_err)?),
    };
    let time_limit = match args.time_limit {
        Some(t) if !(t.is_finite() && t >= 0.0) => return Err(config_err(format!("invalid time limit {t}"))),
        t => t.map(Duration::from_secs_f64),
    };
    Ok(SolveOptions {
        iterations: args.iterations,
        polish: !args.no_polish,
        samples: args.samples,
        bnb_bound,
        time_limit,
        ..SolveOptions::default()
    })
}

fn ids_of(loaded: &LoadedInstance, sel: &FlipSet) -> Vec<String> {
    sel.selected().iter().map(|&i| loaded.ids[i].clone()).collect()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("-".into(), |v| format!("{v:.6}"))
}

fn print_report(name: &str, loaded: &LoadedInstance, kspec: KSpec, report: &SolverReport, format: TextFormat) {
    let inst = &loaded.instance;
    let (feasible, verified, _) = verify(inst, report);
    let ids = ids_of(loaded, &report.selection);
    match format {
        TextFormat::Json => {
            let v = json!({
                "dataset": name,
                "n": inst.node_count(),
                "m": inst.graph().edge_count(),
                "k": inst.budget(),
                "k_spec": kspec.to_string(),
                "algorithm": report.algorithm.name(),
                "seed": report.seed.filter(|_| is_randomized(report.algorithm)),
                "value": report.normalized_value(),
                "base_index": report.base_index,
                "gain": report.gain,
                "selection": ids,
                "cost": report.cost(),
                "bound_index": report.normalized_bound(),
                "bound_gain": report.relaxation_bound,
                "residual": report.residuals.map(|r| r.max()),
                "feasible": feasible,
                "verified": verified,
                "proven_optimal": report.proven_optimal,
                "runtime_ms": report.runtime.as_secs_f64() * 1e3,
                "note": REPORT_NOTE,
            });
            println!("{}", serde_json::to_string_pretty(&v).expect("report serializes"));
        }
        TextFormat::Text => {
            println!("dataset     {name} (n={}, m={})", inst.node_count(), inst.graph().edge_count());
            println!("k           {} (from {kspec}; fractions round down)", inst.budget());
            println!("algorithm   {}", report.algorithm);
            if let Some(seed) = report.seed.filter(|_| is_randomized(report.algorithm)) {
                println!("seed        {seed}");
            }
            println!("value       {:.6}  (index/4; base {:.6} + gain {:.6})", report.normalized_value(), report.base_index, report.gain);
            println!("selection   {}", ids.join(" "));
            println!("cost        {:.6}", report.cost() + 0.0);
            if report.relaxation_bound.is_some() {
                println!("bound       {} (index/4), {} (gain)", fmt_opt(report.normalized_bound()), fmt_opt(report.relaxation_bound));
            }
            if let Some(r) = report.residuals {
                println!("residual    {:.3e}", r.max());
            }
            if let Some(p) = report.proven_optimal {
                println!("optimal     {}", if p { "proven" } else { "not proven" });
            }
            println!("feasible    {feasible} (value re-verified: {verified})");
            println!("runtime     {:.3} ms", report.runtime.as_secs_f64() * 1e3);
        }
    }
}

fn cmd_solve(args: SolveArgs) -> Result<(), HarnessError> {
    let (name, loaded, kspec) = resolve_instance(&args.instance)?;
    let inst = &loaded.instance;
    let p = inst.objective();
    if let Some(path) = &args.export_sdpa {
        write_file(path, &export_sdpa(&SdpProblem::new(inst, &p)))?;
    }
    if let Some(path) = &args.export_lp {
        write_file(path, &export_lp(&glover_program(inst, &p)))?;
    }
    if args.export_only {
        return Ok(());
    }
    let algorithm: Algorithm = args.algorithm.parse().map_err(config_err)?;
    let opts = solve_options(&args.solver)?;
    let result = match &args.sdpa_solution {
        Some(path) => {
            if algorithm != Algorithm::SdpRelax {
                return Err(config_err("--sdpa-solution needs --algorithm sdp-relax"));
            }
            let sol = import_sdpa_solution(&SdpProblem::new(inst, &p), &read_file(path)?)?;
            Ok(gaussian_round(&sol, inst, &p, &rounding_config(&opts, args.solver.seed)))
        }
        None => solve_one(inst, &p, algorithm, args.solver.seed, &opts),
    };
    match result {
        Ok(report) => {
            print_report(&name, &loaded, kspec, &report, args.format);
            Ok(())
        }
        Err(HarnessError::Exact(ExactError::Timeout(report))) => {
            print_report(&name, &loaded, kspec, &report, args.format);
            Err(HarnessError::Exact(ExactError::Timeout(report)))
        }
        Err(e) => Err(e),
    }
}

fn cmd_bound(args: BoundArgs) -> Result<(), HarnessError> {
    let (name, loaded, kspec) = resolve_instance(&args.instance)?;
    let inst = &loaded.instance;
    let p = inst.objective();
    let report = compute_bounds(inst, &p, args.tol)?;
    let base = inst.base_index_normalized();
    match args.format {
        TextFormat::Json => {
            let v = json!({
                "dataset": name,
                "n": inst.node_count(),
                "k": inst.budget(),
                "k_spec": kspec.to_string(),
                "base_index": base,
                "cardinality": report.cardinality,
                "lambda_max": report.lambda_max_estimate,
                "power_iterations": report.power_iters_used,
                "eigen_converged": report.eigen_converged,
                "eigen": report.eigen_bound,
                "gersh": report.gersh_bound,
                "rowsum": report.rowsum_bound,
                "note": "bounds are on the flip gain x'Px; add base_index for the index/4 scale",
            });
            println!("{}", serde_json::to_string_pretty(&v).expect("bounds serialize"));
        }
        TextFormat::Text => {
            println!("dataset     {name} (n={}, m={})", inst.node_count(), inst.graph().edge_count());
            println!("k           {} (from {kspec}; fractions round down), at most {} nodes", inst.budget(), report.cardinality);
            println!("lambda_max  {:.9} ({} power iterations)", report.lambda_max_estimate, report.power_iters_used);
            println!("{:<8} {:>16} {:>16}", "bound", "gain", "index/4");
            for kind in [BoundKind::Eigen, BoundKind::Gersh, BoundKind::Rowsum] {
                let b = report.get(kind);
                println!("{:<8} {:>16.6} {:>16.6}", kind.name(), b, base + b);
            }
        }
    }
    Ok(())
}

fn write_instance(prefix: &std::path::Path, loaded: &LoadedInstance, with_costs: bool) -> Result<(), HarnessError> {
    let with_ext = |ext: &str| {
        let mut p = prefix.as_os_str().to_owned();
        p.push(ext);
        PathBuf::from(p)
    };
    write_file(&with_ext(".edges"), &format_edges(loaded))?;
    write_file(&with_ext(".exposure"), &format_exposure(loaded))?;
    if with_costs {
        write_file(&with_ext(".costs"), &format_costs(loaded))?;
    }
    let inst = &loaded.instance;
    eprintln!(
        "wrote {} (n={}, m={}, index/4={})",
        prefix.display(),
        inst.node_count(),
        inst.graph().edge_count(),
        inst.base_index_normalized()
    );
    Ok(())
}

fn cmd_gen(cmd: GenCommand) -> Result<(), HarnessError> {
    match cmd {
        GenCommand::TwoCommunity { n, p_in, p_out, seed, out } => {
            let inst = gen_two_community(n, p_in, p_out, seed)?;
            write_instance(&out, &LoadedInstance::with_numeric_ids(inst), false)
        }
        GenCommand::Karate { random_exposure, out } => {
            let mut k = karate(0.0);
            if let Some(seed) = random_exposure {
                k.instance = gen_random_exposure(&k.instance, seed);
            }
            write_instance(&out, &k, false)
        }
        GenCommand::RandomExposure { edges, exposure, seed, out } => {
            let mut l = load_instance(&edges, &exposure, None, 0.0)?;
            l.instance = gen_random_exposure(&l.instance, seed);
            write_instance(&out, &l, false)
        }
        GenCommand::Subsetsum { items, target, out } => {
            let inst = gen_subsetsum(&items, target)?;
            let ids = (0..inst.node_count()).map(|i| i.to_string()).collect();
            write_instance(&out, &LoadedInstance { instance: inst, ids }, true)?;
            println!("k = {target}");
            Ok(())
        }
    }
}

fn cmd_bench(args: BenchArgs) -> Result<(), HarnessError> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    for kv in &args.overrides {
        let (k, v) = kv.split_once('=').ok_or_else(|| config_err(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        cfg.apply(k, v)?;
    }
    if let Some(f) = &args.format {
        cfg.format = f.parse()?;
    }
    if args.no_timing {
        cfg.record_timing = false;
    }
    let rows = run_benchmark(&cfg)?;
    let text = write_report(&rows, cfg.format);
    match &args.output {
        Some(path) => write_file(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_profile(args: ProfileArgs) -> Result<(), HarnessError> {
    let (name, loaded, _) = resolve_instance(&args.instance)?;
    let inst = &loaded.instance;
    let p = inst.objective();
    let mut nodes: Vec<usize> = if args.nodes.is_empty() {
        let algorithm: Algorithm = args.algorithm.parse().map_err(config_err)?;
        let report = solve_one(inst, &p, algorithm, args.solver.seed, &solve_options(&args.solver)?)?;
        selection_order(&p, &report.selection)
    } else {
        args.nodes
            .iter()
            .map(|id| loaded.index_of(id).ok_or_else(|| config_err(format!("unknown node id '{id}'"))))
            .collect::<Result<_, _>>()?
    };
    if let Some(top) = args.top {
        nodes.truncate(top);
    }
    let profiles = node_profile(inst, &loaded.ids, &nodes);
    match args.format {
        TextFormat::Json => {
            let v = json!({ "dataset": name, "n": inst.node_count(), "k": inst.budget(), "nodes": profiles });
            println!("{}", serde_json::to_string_pretty(&v).expect("profiles serialize"));
        }
        TextFormat::Text => {
            println!("{name}: n={}, k={}", inst.node_count(), inst.budget());
            println!("{:>8} {:>6} {:>6} {:>6} {:>6} {:>10} {:>6}", "node", "echo", "rank", "degree", "rank", "pagerank", "rank");
            for np in &profiles {
                println!(
                    "{:>8} {:>6} {:>6} {:>6} {:>6} {:>10.6} {:>6}",
                    np.id, np.echo_chamber, np.echo_rank, np.degree, np.degree_rank, np.pagerank, np.pagerank_rank
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Bound(a) => cmd_bound(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Profile(a) => cmd_profile(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
