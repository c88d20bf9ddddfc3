//! Graph storage, the diversity index and the quadratic objective `P`.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("self loop at node {0}")]
    SelfLoop(usize),
    #[error("node index {index} out of range for a graph with {n} nodes")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("vector of length {got} does not match node count {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite weight on edge ({0}, {1})")]
    NonFiniteWeight(usize, usize),
    #[error("exposure entry {index} is {value}; binary exposure must be -1 or +1")]
    NonBinaryExposure { index: usize, value: f64 },
    #[error("cost of node {index} is {value}; costs must be finite and nonnegative")]
    InvalidCost { index: usize, value: f64 },
    #[error("budget {0} must be finite and nonnegative")]
    InvalidBudget(f64),
    #[error("node {0} selected twice")]
    AlreadySelected(usize),
}

/// Undirected weighted graph in compressed sparse row form.
///
/// Each edge appears once in [`Graph::edges`] with `i < j` and twice in the
/// adjacency rows. Neighbor lists are sorted by index.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    weights: Vec<f64>,
    degree: Vec<f64>,
}

impl Graph {
    /// Builds a graph on nodes `0..n`. Endpoint order within a triple does not
    /// matter, but each unordered pair may appear only once.
    pub fn from_edges<I>(n: usize, triples: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut edges = Vec::new();
        for (a, b, w) in triples {
            for index in [a, b] {
                if index >= n {
                    return Err(GraphError::IndexOutOfRange { index, n });
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            if !w.is_finite() {
                return Err(GraphError::NonFiniteWeight(a, b));
            }
            edges.push((a.min(b), a.max(b), w));
        }
        edges.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        if let Some(pair) = edges.windows(2).find(|p| (p[0].0, p[0].1) == (p[1].0, p[1].1)) {
            return Err(GraphError::DuplicateEdge(pair[0].0, pair[0].1));
        }

        let mut counts = vec![0usize; n];
        for &(i, j, _) in &edges {
            counts[i] += 1;
            counts[j] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for c in &counts {
            offsets.push(offsets.last().unwrap() + c);
        }
        let nnz = offsets[n];
        let mut neighbors = vec![0usize; nnz];
        let mut weights = vec![0.0; nnz];
        let mut cursor = offsets[..n].to_vec();
        // Two passes over the sorted edge list keep every row sorted: all lower
        // neighbors are written first, then all higher ones.
        for &(i, j, w) in &edges {
            neighbors[cursor[j]] = i;
            weights[cursor[j]] = w;
            cursor[j] += 1;
        }
        for &(i, j, w) in &edges {
            neighbors[cursor[i]] = j;
            weights[cursor[i]] = w;
            cursor[i] += 1;
        }
        let mut graph = Graph {
            n,
            edges,
            offsets,
            neighbors,
            weights,
            degree: Vec::new(),
        };
        graph.degree = (0..n).map(|i| graph.neighbors(i).map(|(_, w)| w).sum()).collect();
        Ok(graph)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(i, j, w)` with `i < j`, sorted.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[i]..self.offsets[i + 1];
        self.neighbors[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    /// Number of incident edges (unweighted).
    pub fn neighbor_count(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    /// Weighted degree `D_ii = Σ_j w_ij`.
    pub fn degree(&self, i: usize) -> f64 {
        self.degree[i]
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degree
    }

    pub fn edge_weight(&self, i: usize, j: usize) -> Option<f64> {
        let range = self.offsets[i]..self.offsets[i + 1];
        self.neighbors[range.clone()]
            .binary_search(&j)
            .ok()
            .map(|pos| self.weights[range.start + pos])
    }

    /// `Σ |w_ij|` over edges, the scale used for floating-point tolerances.
    pub fn total_abs_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2.abs()).sum()
    }

    /// Mean number of neighbors, `2m / n`.
    pub fn average_degree(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            2.0 * self.edges.len() as f64 / self.n as f64
        }
    }

    /// `L v` with `L = D - A`.
    pub fn laplacian_mul(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.degree[i] * v[i] - self.neighbors(i).map(|(j, w)| w * v[j]).sum::<f64>())
            .collect()
    }

    /// Dense Laplacian, row-major. Intended for small graphs and tests.
    pub fn laplacian_dense(&self) -> Vec<Vec<f64>> {
        let mut l = vec![vec![0.0; self.n]; self.n];
        for &(i, j, w) in &self.edges {
            l[i][j] -= w;
            l[j][i] -= w;
            l[i][i] += w;
            l[j][j] += w;
        }
        l
    }
}

/// Binary exposure vector with entries in `{-1, +1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Exposure(Vec<i8>);

impl Exposure {
    pub fn from_signs(signs: Vec<i8>) -> Result<Self, GraphError> {
        if let Some((index, &v)) = signs.iter().enumerate().find(|(_, &v)| v != 1 && v != -1) {
            return Err(GraphError::NonBinaryExposure { index, value: v as f64 });
        }
        Ok(Exposure(signs))
    }

    pub fn from_values(values: &[f64]) -> Result<Self, GraphError> {
        values
            .iter()
            .enumerate()
            .map(|(index, &v)| {
                if v == 1.0 {
                    Ok(1)
                } else if v == -1.0 {
                    Ok(-1)
                } else {
                    Err(GraphError::NonBinaryExposure { index, value: v })
                }
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Exposure)
    }

    pub fn uniform(n: usize, sign: i8) -> Self {
        assert!(sign == 1 || sign == -1, "sign must be +1 or -1");
        Exposure(vec![sign; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn value(&self, i: usize) -> f64 {
        self.0[i] as f64
    }

    pub fn negated(&self) -> Self {
        Exposure(self.0.iter().map(|&v| -v).collect())
    }

    pub fn count_positive(&self) -> usize {
        self.0.iter().filter(|&&v| v > 0).count()
    }
}

/// One solvable problem: graph, exposure, node costs `b` and budget `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    graph: Graph,
    exposure: Exposure,
    costs: Vec<f64>,
    budget: f64,
}

impl Instance {
    pub fn new(graph: Graph, exposure: Exposure, costs: Vec<f64>, budget: f64) -> Result<Self, GraphError> {
        let n = graph.node_count();
        for len in [exposure.len(), costs.len()] {
            if len != n {
                return Err(GraphError::LengthMismatch { expected: n, got: len });
            }
        }
        if let Some((index, &value)) = costs.iter().enumerate().find(|(_, c)| !(c.is_finite() && **c >= 0.0)) {
            return Err(GraphError::InvalidCost { index, value });
        }
        if !(budget.is_finite() && budget >= 0.0) {
            return Err(GraphError::InvalidBudget(budget));
        }
        Ok(Instance { graph, exposure, costs, budget })
    }

    /// All costs equal to one, so the budget is a cardinality limit.
    pub fn with_unit_costs(graph: Graph, exposure: Exposure, budget: f64) -> Result<Self, GraphError> {
        let n = graph.node_count();
        Self::new(graph, exposure, vec![1.0; n], budget)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn exposure(&self) -> &Exposure {
        &self.exposure
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn with_budget(&self, budget: f64) -> Result<Self, GraphError> {
        Self::new(self.graph.clone(), self.exposure.clone(), self.costs.clone(), budget)
    }

    pub fn with_exposure(&self, exposure: Exposure) -> Result<Self, GraphError> {
        Self::new(self.graph.clone(), exposure, self.costs.clone(), self.budget)
    }

    pub fn objective(&self) -> ObjectiveMatrix {
        build_objective(&self.graph, &self.exposure).expect("instance lengths are validated")
    }

    /// True when every cost is at least one, the regime in which the
    /// cardinality-based upper bounds are sound.
    pub fn has_unit_class_costs(&self) -> bool {
        self.costs.iter().all(|&c| c >= 1.0)
    }

    /// Largest number of nodes that can be selected together.
    pub fn max_cardinality(&self) -> usize {
        let mut sorted = self.costs.clone();
        sorted.sort_by(f64::total_cmp);
        let mut spent = 0.0;
        let mut count = 0;
        for c in sorted {
            if spent + c <= self.budget {
                spent += c;
                count += 1;
            } else {
                break;
            }
        }
        count
    }

    pub fn is_feasible(&self, x: &FlipSet) -> bool {
        x.node_count() == self.node_count() && x.selected().iter().map(|&i| self.costs[i]).sum::<f64>() <= self.budget
    }

    /// Diversity index before any flip, divided by four.
    pub fn base_index_normalized(&self) -> f64 {
        normalized_index(&self.graph, &self.exposure).expect("instance lengths are validated")
    }
}

/// The symmetric matrix `P = Diag(s) L Diag(s) - Diag(q)` with `q_i = s_i (L s)_i`.
///
/// Off-diagonal entries share the sparsity pattern of the graph
/// (`P_ij = -s_i w_ij s_j`); the diagonal is `P_ii = s_i Σ_j w_ij s_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveMatrix {
    diag: Vec<f64>,
    q: Vec<f64>,
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    scale: f64,
}

impl ObjectiveMatrix {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    /// Off-diagonal entries of row `i`, sorted by column.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[i]..self.offsets[i + 1];
        self.cols[range.clone()].iter().copied().zip(self.vals[range].iter().copied())
    }

    pub fn row_len(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        let range = self.offsets[i]..self.offsets[i + 1];
        match self.cols[range.clone()].binary_search(&j) {
            Ok(pos) => self.vals[range.start + pos],
            Err(_) => 0.0,
        }
    }

    /// `Σ_{j≠i} |P_ij|`.
    pub fn off_diag_abs_sum(&self, i: usize) -> f64 {
        self.row(i).map(|(_, v)| v.abs()).sum()
    }

    /// `Σ |w_ij|` of the source graph; tolerances scale with it.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn nnz_off_diag(&self) -> usize {
        self.vals.len()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n())
            .map(|i| self.diag[i] * v[i] + self.row(i).map(|(j, p)| p * v[j]).sum::<f64>())
            .collect()
    }

    /// `vᵀ P v` for a real vector.
    pub fn quadratic(&self, v: &[f64]) -> f64 {
        self.mul_vec(v).iter().zip(v).map(|(a, b)| a * b).sum()
    }

    /// `xᵀ P x` for the indicator vector of `nodes`, evaluated from scratch.
    pub fn quad_form_of(&self, nodes: &[usize]) -> f64 {
        let mut member = vec![false; self.n()];
        for &i in nodes {
            member[i] = true;
        }
        let mut value = 0.0;
        for &i in nodes {
            value += self.diag[i];
            for (j, p) in self.row(i) {
                if member[j] {
                    value += p;
                }
            }
        }
        value
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][i] = self.diag[i];
            for (j, p) in self.row(i) {
                m[i][j] = p;
            }
        }
        m
    }
}

/// A selection of nodes to flip together with its cached objective value
/// `xᵀPx` and total cost.
#[derive(Debug, Clone, PartialEq)]
pub struct FlipSet {
    member: Vec<bool>,
    selected: Vec<usize>,
    value: f64,
    cost: f64,
}

impl FlipSet {
    pub fn empty(n: usize) -> Self {
        FlipSet {
            member: vec![false; n],
            selected: Vec::new(),
            value: 0.0,
            cost: 0.0,
        }
    }

    /// Builds a selection and evaluates it from scratch. Duplicates are ignored.
    pub fn from_nodes(p: &ObjectiveMatrix, costs: &[f64], nodes: &[usize]) -> Result<Self, GraphError> {
        let n = p.n();
        if costs.len() != n {
            return Err(GraphError::LengthMismatch { expected: n, got: costs.len() });
        }
        let mut selected = nodes.to_vec();
        selected.sort_unstable();
        selected.dedup();
        if let Some(&index) = selected.iter().find(|&&i| i >= n) {
            return Err(GraphError::IndexOutOfRange { index, n });
        }
        let mut member = vec![false; n];
        for &i in &selected {
            member[i] = true;
        }
        let value = p.quad_form_of(&selected);
        let cost = selected.iter().map(|&i| costs[i]).sum();
        Ok(FlipSet { member, selected, value, cost })
    }

    pub fn node_count(&self) -> usize {
        self.member.len()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.member[i]
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    /// Cached `xᵀPx`.
    pub fn value(&self) -> f64 {
        self.value
    }

    /// Cached `bᵀx`.
    pub fn cost(&self) -> f64 {
        self.cost
    }

    /// Adds node `j`, returning the objective change `P_jj + 2 Σ_{i∈x} P_ij`.
    pub fn insert(&mut self, p: &ObjectiveMatrix, cost: f64, j: usize) -> Result<f64, GraphError> {
        let n = self.node_count();
        if j >= n {
            return Err(GraphError::IndexOutOfRange { index: j, n });
        }
        if self.member[j] {
            return Err(GraphError::AlreadySelected(j));
        }
        let delta = crate::greedy::marginal_gain(p, self, j)?;
        self.insert_with_delta(j, cost, delta);
        Ok(delta)
    }

    pub(crate) fn insert_with_delta(&mut self, j: usize, cost: f64, delta: f64) {
        self.member[j] = true;
        let pos = self.selected.binary_search(&j).unwrap_err();
        self.selected.insert(pos, j);
        self.value += delta;
        self.cost += cost;
    }

    /// Removes node `j`, returning the objective change (negative of its
    /// marginal contribution). Cost is re-summed to avoid drift.
    pub(crate) fn remove_with_delta(&mut self, j: usize, costs: &[f64], delta: f64) {
        self.member[j] = false;
        let pos = self.selected.binary_search(&j).expect("node is selected");
        self.selected.remove(pos);
        self.value += delta;
        self.cost = self.selected.iter().map(|&i| costs[i]).sum();
    }

    /// Re-evaluates the cached value and cost from scratch.
    pub fn refresh(&mut self, p: &ObjectiveMatrix, costs: &[f64]) {
        self.value = p.quad_form_of(&self.selected);
        self.cost = self.selected.iter().map(|&i| costs[i]).sum();
    }
}

/// `η(G, s) = Σ_edges w_ij (s_i - s_j)²`.
pub fn diversity_index(g: &Graph, s: &Exposure) -> Result<f64, GraphError> {
    if s.len() != g.node_count() {
        return Err(GraphError::LengthMismatch { expected: g.node_count(), got: s.len() });
    }
    Ok(g.edges()
        .iter()
        .map(|&(i, j, w)| {
            let d = s.value(i) - s.value(j);
            w * d * d
        })
        .sum())
}

/// `η / 4`: for binary exposure this is the total weight of edges whose
/// endpoints disagree.
pub fn normalized_index(g: &Graph, s: &Exposure) -> Result<f64, GraphError> {
    diversity_index(g, s).map(|eta| eta / 4.0)
}

/// Exposure after flipping every selected node: `y = s - 2 Diag(s) x`.
pub fn apply_flips(s: &Exposure, x: &FlipSet) -> Result<Exposure, GraphError> {
    if x.node_count() != s.len() {
        return Err(GraphError::LengthMismatch { expected: s.len(), got: x.node_count() });
    }
    Ok(Exposure(
        s.signs()
            .iter()
            .enumerate()
            .map(|(i, &v)| if x.contains(i) { -v } else { v })
            .collect(),
    ))
}

pub fn build_objective(g: &Graph, s: &Exposure) -> Result<ObjectiveMatrix, GraphError> {
    let n = g.node_count();
    if s.len() != n {
        return Err(GraphError::LengthMismatch { expected: n, got: s.len() });
    }
    let mut diag = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    let mut offsets = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    offsets.push(0);
    for i in 0..n {
        let si = s.value(i);
        let mut agreement = 0.0;
        for (j, w) in g.neighbors(i) {
            let sj = s.value(j);
            agreement += w * si * sj;
            cols.push(j);
            vals.push(-si * w * sj);
        }
        offsets.push(cols.len());
        diag.push(agreement);
        q.push(g.degree(i) - agreement);
    }
    Ok(ObjectiveMatrix {
        diag,
        q,
        offsets,
        cols,
        vals,
        scale: g.total_abs_weight(),
    })
}

/// `xᵀ P x`, evaluated from scratch. Flipping `x` raises `η` by four times this.
pub fn objective_gain(p: &ObjectiveMatrix, x: &FlipSet) -> Result<f64, GraphError> {
    if x.node_count() != p.n() {
        return Err(GraphError::LengthMismatch { expected: p.n(), got: x.node_count() });
    }
    Ok(p.quad_form_of(x.selected()))
}
