//! Exact solvers for small instances: plain enumeration and a depth-first
//! branch-and-bound pruned by the cardinality bounds.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::bounds::{self, BoundKind};
use crate::graph::{FlipSet, Instance, ObjectiveMatrix};
use crate::greedy::{i_greedy, GreedyConfig};
use crate::report::{Algorithm, SolverReport};

pub const DEFAULT_ENUMERATION_LIMIT: u64 = 50_000_000;

#[derive(Debug, Clone, Error)]
pub enum ExactError {
    #[error("more than {limit} feasible selections; enumeration refused")]
    SearchSpaceTooLarge { limit: u64 },
    /// The search ran out of time. The report holds the best selection found.
    #[error("time limit reached after {:?}; best value so far {}", .0.runtime, .0.gain)]
    Timeout(Box<SolverReport>),
}

impl ExactError {
    /// The incumbent carried by a timeout.
    pub fn incumbent(&self) -> Option<&SolverReport> {
        match self {
            ExactError::Timeout(r) => Some(r),
            _ => None,
        }
    }
}

/// Number of selections `x` with `bᵀx ≤ k`, counted up to `cap + 1`.
pub fn count_feasible(costs: &[f64], budget: f64, cap: u64) -> u64 {
    let n = costs.len();
    if let Some(&c0) = costs.first() {
        if costs.iter().all(|&c| c == c0) && c0 > 0.0 {
            let card = ((budget / c0).floor() as usize).min(n);
            return binomial_prefix_sum(n, card, cap);
        }
    }
    let mut sorted = costs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut count = 0u64;
    count_rec(&sorted, 0, budget, cap, &mut count);
    count
}

fn binomial_prefix_sum(n: usize, card: usize, cap: u64) -> u64 {
    let mut total: u64 = 1;
    let mut term: u128 = 1;
    for j in 1..=card {
        term = term * (n - j + 1) as u128 / j as u128;
        total = total.saturating_add(term.min(u64::MAX as u128) as u64);
        if total > cap {
            return cap + 1;
        }
    }
    total
}

fn count_rec(sorted: &[f64], start: usize, room: f64, cap: u64, count: &mut u64) {
    *count += 1;
    for j in start..sorted.len() {
        if *count > cap {
            return;
        }
        if sorted[j] > room {
            break;
        }
        count_rec(sorted, j + 1, room - sorted[j], cap, count);
    }
}

/// Running selection with `acc[j] = Σ_{i∈x} P_ij` kept for every node.
struct Walker<'a> {
    p: &'a ObjectiveMatrix,
    costs: &'a [f64],
    acc: Vec<f64>,
    stack: Vec<usize>,
    value: f64,
    cost: f64,
}

impl<'a> Walker<'a> {
    fn new(p: &'a ObjectiveMatrix, costs: &'a [f64]) -> Self {
        Walker { p, costs, acc: vec![0.0; p.n()], stack: Vec::new(), value: 0.0, cost: 0.0 }
    }

    fn gain(&self, j: usize) -> f64 {
        self.p.diag()[j] + 2.0 * self.acc[j]
    }

    fn push(&mut self, j: usize) {
        self.value += self.gain(j);
        self.cost += self.costs[j];
        for (i, v) in self.p.row(j) {
            self.acc[i] += v;
        }
        self.stack.push(j);
    }

    fn pop(&mut self) {
        let j = self.stack.pop().expect("walker stack is not empty");
        for (i, v) in self.p.row(j) {
            self.acc[i] -= v;
        }
        self.cost -= self.costs[j];
        self.value -= self.gain(j);
    }
}

/// Global optimum by visiting every feasible selection.
///
/// Selections are visited in lexicographic order of their sorted index
/// sequences and only strict improvements replace the incumbent, so the
/// returned optimum is the lexicographically smallest one (the empty
/// selection wins any tie at zero).
pub fn enumerate_exact(inst: &Instance, p: &ObjectiveMatrix, limit: u64) -> Result<SolverReport, ExactError> {
    let started = Instant::now();
    let costs = inst.costs();
    if count_feasible(costs, inst.budget(), limit) > limit {
        return Err(ExactError::SearchSpaceTooLarge { limit });
    }
    let tol = 1e-12 * (1.0 + p.scale());
    let mut walker = Walker::new(p, costs);
    let mut best_value = 0.0;
    let mut best: Vec<usize> = Vec::new();

    fn visit(
        w: &mut Walker<'_>,
        start: usize,
        budget: f64,
        tol: f64,
        best_value: &mut f64,
        best: &mut Vec<usize>,
    ) {
        if w.value > *best_value + tol {
            *best_value = w.value;
            best.clone_from(&w.stack);
        }
        for j in start..w.p.n() {
            if w.cost + w.costs[j] <= budget {
                w.push(j);
                visit(w, j + 1, budget, tol, best_value, best);
                w.pop();
            }
        }
    }
    visit(&mut walker, 0, inst.budget(), tol, &mut best_value, &mut best);

    let selection = FlipSet::from_nodes(p, costs, &best).expect("indices come from 0..n");
    let mut report = SolverReport::new(Algorithm::Enumerate, inst, selection);
    report.proven_optimal = Some(true);
    report.runtime = started.elapsed();
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BnbConfig {
    /// Remainder bound used for pruning; `None` searches without pruning.
    pub bound: Option<BoundKind>,
    pub time_limit: Option<Duration>,
    /// Greedy run that provides the starting incumbent; `None` starts from
    /// the empty selection.
    pub warm_start: Option<GreedyConfig>,
}

impl Default for BnbConfig {
    fn default() -> Self {
        BnbConfig {
            bound: Some(BoundKind::Rowsum),
            time_limit: None,
            warm_start: Some(GreedyConfig::new(20, 0)),
        }
    }
}

impl BnbConfig {
    pub fn with_bound(bound: Option<BoundKind>) -> Self {
        BnbConfig { bound, ..Self::default() }
    }
}

/// Per-node data for the remainder bounds.
struct Pruner {
    kind: BoundKind,
    /// `Σ_{j≠i}|P_ij|` per node.
    row_norm: Vec<f64>,
    /// `prefix[i][t]`: sum of the `t` largest positive off-diagonal entries of row `i`.
    prefix: Vec<Vec<f64>>,
    lambda_max: f64,
}

impl Pruner {
    fn new(kind: BoundKind, p: &ObjectiveMatrix) -> Self {
        let n = p.n();
        let row_norm = (0..n).map(|i| p.off_diag_abs_sum(i)).collect();
        let prefix = if kind == BoundKind::Rowsum {
            (0..n)
                .map(|i| {
                    let mut pos: Vec<f64> = p.row(i).map(|(_, v)| v).filter(|&v| v > 0.0).collect();
                    pos.sort_by(|a, b| b.total_cmp(a));
                    let mut acc = vec![0.0];
                    for v in pos {
                        acc.push(acc.last().unwrap() + v);
                    }
                    acc
                })
                .collect()
        } else {
            Vec::new()
        };
        let lambda_max = if kind == BoundKind::Eigen {
            let run = bounds::lambda_max(p, bounds::DEFAULT_EIGEN_TOL, bounds::default_power_iters(n));
            if run.converged {
                // Guard the estimate against its own residual error.
                run.lambda + 1e-6 * (1.0 + run.lambda.abs())
            } else {
                bounds::gersh_value(p)
            }
        } else {
            0.0
        };
        Pruner { kind, row_norm, prefix, lambda_max }
    }

    /// Upper bound on the gain of adding at most `r` nodes from `undecided`.
    fn remainder(&self, w: &Walker<'_>, undecided: &[usize], r: usize, scratch: &mut Vec<f64>) -> f64 {
        if r == 0 || undecided.is_empty() {
            return 0.0;
        }
        scratch.clear();
        match self.kind {
            BoundKind::Gersh => {
                scratch.extend(undecided.iter().map(|&j| (w.gain(j) + self.row_norm[j]).max(0.0)));
                bounds::top_sum(scratch, r)
            }
            BoundKind::Rowsum => {
                scratch.extend(undecided.iter().map(|&j| {
                    let pre = &self.prefix[j];
                    (w.gain(j) + pre[(r - 1).min(pre.len() - 1)]).max(0.0)
                }));
                bounds::top_sum(scratch, r)
            }
            BoundKind::Eigen => {
                scratch.extend(undecided.iter().map(|&j| (2.0 * w.acc[j]).max(0.0)));
                bounds::top_sum(scratch, r) + (r as f64 * self.lambda_max).max(0.0)
            }
        }
    }
}

struct Search<'a> {
    order: Vec<usize>,
    budget: f64,
    pruner: Option<Pruner>,
    deadline: Option<Instant>,
    tol: f64,
    best_value: f64,
    best: Vec<usize>,
    nodes: u64,
    timed_out: bool,
    scratch: Vec<f64>,
    undecided: Vec<usize>,
    walker: Walker<'a>,
}

impl Search<'_> {
    fn run(&mut self, depth: usize) {
        if self.timed_out {
            return;
        }
        self.nodes += 1;
        if self.nodes % 4096 == 0 {
            if let Some(deadline) = self.deadline {
                if Instant::now() >= deadline {
                    self.timed_out = true;
                    return;
                }
            }
        }
        let w = &self.walker;
        if w.value > self.best_value + self.tol {
            self.best_value = w.value;
            self.best.clone_from(&w.stack);
        }
        if depth == self.order.len() {
            return;
        }
        if let Some(pruner) = &self.pruner {
            self.undecided.clear();
            let room = self.budget - w.cost;
            self.undecided
                .extend(self.order[depth..].iter().copied().filter(|&j| w.costs[j] <= room));
            // Every cost is at least one here, so the room caps the count.
            let r = (room.max(0.0).floor() as usize).min(self.undecided.len());
            let bound = pruner.remainder(w, &self.undecided, r, &mut self.scratch);
            if w.value + bound <= self.best_value + self.tol {
                return;
            }
        }
        let j = self.order[depth];
        if self.walker.cost + self.walker.costs[j] <= self.budget {
            self.walker.push(j);
            self.run(depth + 1);
            self.walker.pop();
        }
        self.run(depth + 1);
    }
}

/// Depth-first include/exclude search over nodes in descending `P_ii` order.
///
/// A subtree is cut when the current value plus a bound on what the
/// undecided nodes can still add does not beat the incumbent. Instances with
/// a cost below one get no pruning, since the bounds are unsound there.
/// On timeout the incumbent comes back inside [`ExactError::Timeout`].
pub fn branch_and_bound(inst: &Instance, p: &ObjectiveMatrix, cfg: &BnbConfig) -> Result<SolverReport, ExactError> {
    let started = Instant::now();
    let costs = inst.costs();
    let n = p.n();
    let diag = p.diag();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| diag[b].total_cmp(&diag[a]).then(a.cmp(&b)));

    let (mut best_value, mut best) = (0.0, Vec::new());
    if let Some(gcfg) = &cfg.warm_start {
        let warm = i_greedy(inst, p, gcfg);
        if warm.gain > 0.0 {
            best_value = warm.gain;
            best = warm.selection.selected().to_vec();
        }
    }
    let pruner = match cfg.bound {
        Some(kind) if inst.has_unit_class_costs() => Some(Pruner::new(kind, p)),
        _ => None,
    };
    let mut search = Search {
        order,
        budget: inst.budget(),
        pruner,
        deadline: cfg.time_limit.map(|t| started + t),
        tol: 1e-12 * (1.0 + p.scale()),
        best_value,
        best,
        nodes: 0,
        timed_out: false,
        scratch: Vec::with_capacity(n),
        undecided: Vec::with_capacity(n),
        walker: Walker::new(p, costs),
    };
    search.run(0);

    let selection = FlipSet::from_nodes(p, costs, &search.best).expect("indices come from 0..n");
    let mut report = SolverReport::new(Algorithm::BranchAndBound, inst, selection);
    report.runtime = started.elapsed();
    report.seed = cfg.warm_start.map(|g| g.seed);
    report.proven_optimal = Some(!search.timed_out);
    if search.timed_out {
        Err(ExactError::Timeout(Box::new(report)))
    } else {
        Ok(report)
    }
}
