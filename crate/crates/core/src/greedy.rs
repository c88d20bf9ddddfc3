//! Greedy heuristics: the diagonal-ratio scan and iterative greedy with
//! randomized local search.

use std::cmp::Ordering;
use std::time::Instant;

use rand::Rng;

use crate::graph::{FlipSet, GraphError, Instance, ObjectiveMatrix};
use crate::report::{Algorithm, SolverReport};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GreedyConfig {
    /// Local-search rounds; values below one are treated as one.
    pub iterations: usize,
    pub seed: u64,
    /// Record the incumbent after every addition instead of only when a fill
    /// pass exhausts the budget.
    pub track_prefix: bool,
}

impl GreedyConfig {
    pub fn new(iterations: usize, seed: u64) -> Self {
        GreedyConfig {
            iterations,
            seed,
            track_prefix: true,
        }
    }
}

impl Default for GreedyConfig {
    fn default() -> Self {
        GreedyConfig::new(100, 0)
    }
}

/// `(x ∪ {j})ᵀP(x ∪ {j}) - xᵀPx = P_jj + 2 Σ_{i∈x} P_ij`.
///
/// Walks whichever is shorter: the sparse row of `j` or the selection.
pub fn marginal_gain(p: &ObjectiveMatrix, x: &FlipSet, j: usize) -> Result<f64, GraphError> {
    let n = p.n();
    if j >= n {
        return Err(GraphError::IndexOutOfRange { index: j, n });
    }
    if x.contains(j) {
        return Err(GraphError::AlreadySelected(j));
    }
    let cross: f64 = if p.row_len(j) <= x.len() {
        p.row(j).filter(|&(i, _)| x.contains(i)).map(|(_, v)| v).sum()
    } else {
        x.selected().iter().map(|&i| p.entry(j, i)).sum()
    };
    Ok(p.diag()[j] + 2.0 * cross)
}

/// Orders `gain_a / cost_a` against `gain_b / cost_b` without dividing.
///
/// Zero-cost nodes with positive gain rank above every finite ratio and
/// zero-cost nodes with negative gain rank below; a zero-cost, zero-gain node
/// counts as ratio zero.
pub fn ratio_cmp(gain_a: f64, cost_a: f64, gain_b: f64, cost_b: f64) -> Ordering {
    fn class(g: f64, c: f64) -> i8 {
        match (c == 0.0, g.partial_cmp(&0.0)) {
            (true, Some(Ordering::Greater)) => 2,
            (true, Some(Ordering::Less)) => 0,
            _ => 1,
        }
    }
    let (ca, cb) = (class(gain_a, cost_a), class(gain_b, cost_b));
    if ca != cb {
        return ca.cmp(&cb);
    }
    let cmp = |a: f64, b: f64| a.partial_cmp(&b).unwrap_or(Ordering::Equal);
    match ca {
        1 => match (cost_a == 0.0, cost_b == 0.0) {
            (false, false) => cmp(gain_a * cost_b, gain_b * cost_a),
            (true, false) => cmp(0.0, gain_b),
            (false, true) => cmp(gain_a, 0.0),
            (true, true) => Ordering::Equal,
        },
        _ => cmp(gain_a, gain_b),
    }
}

/// Picks nodes in descending `P_ii / b_i` order, adding each one whose cost
/// still fits. Ties go to the lower index.
pub fn s_greedy(inst: &Instance, p: &ObjectiveMatrix) -> SolverReport {
    let started = Instant::now();
    let costs = inst.costs();
    let diag = p.diag();
    let mut order: Vec<usize> = (0..p.n()).collect();
    order.sort_by(|&a, &b| ratio_cmp(diag[b], costs[b], diag[a], costs[a]).then(a.cmp(&b)));

    let mut chosen = Vec::new();
    let mut spent = 0.0;
    for j in order {
        if spent + costs[j] <= inst.budget() {
            spent += costs[j];
            chosen.push(j);
        }
    }
    let mut selection = FlipSet::from_nodes(p, costs, &chosen).expect("indices come from 0..n");
    while selection.cost() > inst.budget() {
        // Summation order differs from the scan above; drop the last pick on a rounding overshoot.
        chosen.pop();
        selection = FlipSet::from_nodes(p, costs, &chosen).expect("indices come from 0..n");
    }
    let mut report = SolverReport::new(Algorithm::SGreedy, inst, selection);
    report.runtime = started.elapsed();
    report
}

/// Selection plus the marginal gain of every node with respect to it.
struct GreedyState<'a> {
    p: &'a ObjectiveMatrix,
    costs: &'a [f64],
    budget: f64,
    x: FlipSet,
    /// `P_jj + 2 Σ_{i∈x, i≠j} P_ij` for every node `j`.
    gains: Vec<f64>,
}

impl<'a> GreedyState<'a> {
    fn new(p: &'a ObjectiveMatrix, costs: &'a [f64], budget: f64, start: &FlipSet) -> Self {
        let mut state = GreedyState {
            p,
            costs,
            budget,
            x: FlipSet::empty(p.n()),
            gains: p.diag().to_vec(),
        };
        for &j in start.selected() {
            state.add(j);
        }
        state
    }

    fn add(&mut self, j: usize) {
        self.x.insert_with_delta(j, self.costs[j], self.gains[j]);
        for (i, v) in self.p.row(j) {
            self.gains[i] += 2.0 * v;
        }
    }

    fn remove(&mut self, j: usize) {
        for (i, v) in self.p.row(j) {
            self.gains[i] -= 2.0 * v;
        }
        self.x.remove_with_delta(j, self.costs, -self.gains[j]);
    }

    fn best_candidate(&self, blocked: &[bool]) -> Option<usize> {
        let room = self.budget - self.x.cost();
        let mut best: Option<usize> = None;
        for j in 0..self.p.n() {
            if self.x.contains(j) || blocked[j] || self.costs[j] > room {
                continue;
            }
            best = match best {
                Some(b) if ratio_cmp(self.gains[j], self.costs[j], self.gains[b], self.costs[b]) != Ordering::Greater => {
                    Some(b)
                }
                _ => Some(j),
            };
        }
        best
    }

    /// Adds the best affordable node until none fits, reporting each
    /// intermediate selection to `on_add`.
    fn fill(&mut self, mut on_add: impl FnMut(&FlipSet)) {
        let mut blocked = vec![false; self.p.n()];
        while let Some(j) = self.best_candidate(&blocked) {
            self.add(j);
            if self.x.cost() > self.budget {
                self.remove(j);
                blocked[j] = true;
                continue;
            }
            on_add(&self.x);
        }
    }
}

/// Iterative greedy with randomized local search.
///
/// Each round fills the selection greedily by best marginal gain per unit
/// cost, then removes one uniformly random selected node. The best selection
/// seen is returned; the empty selection (value 0) is the starting incumbent.
pub fn i_greedy(inst: &Instance, p: &ObjectiveMatrix, cfg: &GreedyConfig) -> SolverReport {
    let mut report = local_search(inst, p, cfg, &FlipSet::empty(p.n()));
    report.algorithm = Algorithm::IGreedy;
    report
}

/// Runs the I-Greedy local search starting from a feasible selection.
pub fn local_search(inst: &Instance, p: &ObjectiveMatrix, cfg: &GreedyConfig, start: &FlipSet) -> SolverReport {
    let started = Instant::now();
    let costs = inst.costs();
    let mut state = GreedyState::new(p, costs, inst.budget(), start);

    let mut best = FlipSet::empty(p.n());
    if inst.is_feasible(&state.x) && state.x.value() > best.value() {
        best = state.x.clone();
    }
    for round in 0..cfg.iterations.max(1) {
        let track = cfg.track_prefix;
        state.fill(|x| {
            if track && x.value() > best.value() {
                best = x.clone();
            }
        });
        if state.x.value() > best.value() {
            best = state.x.clone();
        }
        if state.x.is_empty() {
            continue;
        }
        let mut rng = rng::stream(cfg.seed, round as u64);
        let victim = state.x.selected()[rng.random_range(0..state.x.len())];
        state.remove(victim);
    }
    best.refresh(p, costs);
    let mut report = SolverReport::new(Algorithm::IGreedy, inst, best);
    report.seed = Some(cfg.seed);
    report.runtime = started.elapsed();
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_objective, Exposure, Graph};

    fn path3(k: f64) -> (Instance, ObjectiveMatrix) {
        let g = Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let inst = Instance::with_unit_costs(g, Exposure::uniform(3, 1), k).unwrap();
        let p = inst.objective();
        (inst, p)
    }

    fn triangle(k: f64) -> (Instance, ObjectiveMatrix) {
        let g = Graph::from_edges(3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)]).unwrap();
        let s = Exposure::from_signs(vec![1, 1, -1]).unwrap();
        let inst = Instance::with_unit_costs(g, s, k).unwrap();
        let p = build_objective(inst.graph(), inst.exposure()).unwrap();
        (inst, p)
    }

    #[test]
    fn marginal_gain_examples() {
        let (_, p) = triangle(1.0);
        let c = [1.0; 3];
        assert_eq!(marginal_gain(&p, &FlipSet::empty(3), 0).unwrap(), 0.0);
        let x0 = FlipSet::from_nodes(&p, &c, &[0]).unwrap();
        assert_eq!(marginal_gain(&p, &x0, 2).unwrap(), 0.0);
        assert_eq!(marginal_gain(&p, &x0, 0), Err(GraphError::AlreadySelected(0)));

        let (_, p3) = path3(1.0);
        let x1 = FlipSet::from_nodes(&p3, &c, &[1]).unwrap();
        assert_eq!(marginal_gain(&p3, &x1, 0).unwrap(), -1.0);
    }

    #[test]
    fn marginal_gain_both_paths_agree() {
        // Node 0 has four neighbors; a one-node selection forces the selection walk.
        let g = Graph::from_edges(5, [(0, 1, 1.0), (0, 2, 2.0), (0, 3, 0.5), (0, 4, 1.0), (1, 2, 1.0)]).unwrap();
        let s = Exposure::from_signs(vec![1, -1, 1, 1, -1]).unwrap();
        let p = build_objective(&g, &s).unwrap();
        let c = [1.0; 5];
        for sel in [vec![2], vec![1, 2, 3, 4]] {
            let x = FlipSet::from_nodes(&p, &c, &sel).unwrap();
            let mut with = sel.clone();
            with.push(0);
            let expected = p.quad_form_of(&with) - p.quad_form_of(&sel);
            assert!((marginal_gain(&p, &x, 0).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn ratio_ordering() {
        assert_eq!(ratio_cmp(3.0, 1.0, 5.0, 2.0), Ordering::Greater);
        assert_eq!(ratio_cmp(2.0, 2.0, 1.0, 1.0), Ordering::Equal);
        assert_eq!(ratio_cmp(0.1, 0.0, 100.0, 1.0), Ordering::Greater);
        assert_eq!(ratio_cmp(-0.1, 0.0, -100.0, 1.0), Ordering::Less);
        assert_eq!(ratio_cmp(0.0, 0.0, -1.0, 1.0), Ordering::Greater);
        assert_eq!(ratio_cmp(0.0, 0.0, 1.0, 1.0), Ordering::Less);
        assert_eq!(ratio_cmp(0.0, 0.0, 0.0, 3.0), Ordering::Equal);
        assert_eq!(ratio_cmp(2.0, 0.0, 1.0, 0.0), Ordering::Greater);
    }

    #[test]
    fn s_greedy_examples() {
        let (inst, p) = path3(1.0);
        let r = s_greedy(&inst, &p);
        assert_eq!(r.selection.selected(), &[1]);
        assert_eq!(r.gain, 2.0);

        let (inst, p) = triangle(1.0);
        let r = s_greedy(&inst, &p);
        assert_eq!(r.selection.selected(), &[0]);
        assert_eq!(r.gain, 0.0);
    }

    #[test]
    fn i_greedy_keeps_best_prefix() {
        let (inst, p) = path3(2.0);
        let r = i_greedy(&inst, &p, &GreedyConfig::new(1, 0));
        assert_eq!(r.gain, 2.0);
        assert_eq!(r.selection.selected(), &[1]);

        let strict = GreedyConfig { track_prefix: false, ..GreedyConfig::new(1, 0) };
        let r = i_greedy(&inst, &p, &strict);
        assert_eq!(r.gain, 1.0);
    }

    #[test]
    fn i_greedy_respects_costs() {
        let g = Graph::from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        let inst = Instance::new(g, Exposure::uniform(4, 1), vec![3.0, 2.0, 2.0, 0.0], 3.5).unwrap();
        let p = inst.objective();
        let r = i_greedy(&inst, &p, &GreedyConfig::new(20, 3));
        assert!(r.selection.cost() <= 3.5);
        assert!(inst.is_feasible(&r.selection));
    }

    #[test]
    fn local_search_from_start_never_worse() {
        let (inst, p) = path3(2.0);
        let start = FlipSet::from_nodes(&p, inst.costs(), &[0, 2]).unwrap();
        let r = local_search(&inst, &p, &GreedyConfig::new(5, 1), &start);
        assert!(r.gain >= start.value());
    }
}
