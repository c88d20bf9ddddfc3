//! Node profiles for selected nodes: echo-chamber size, degree and PageRank,
//! each with the node's rank among all nodes.

use serde::Serialize;

use divmax_core::{marginal_gain, FlipSet, Graph, Instance, ObjectiveMatrix};

pub const PAGERANK_DAMPING: f64 = 0.85;
pub const PAGERANK_TOL: f64 = 1e-10;
const PAGERANK_MAX_ITERS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeProfile {
    pub node: usize,
    pub id: String,
    /// Neighbors sharing the node's exposure.
    pub echo_chamber: usize,
    pub degree: usize,
    pub pagerank: f64,
    /// 1-based competition ranks (ties share the best position) among all nodes.
    pub echo_rank: usize,
    pub degree_rank: usize,
    pub pagerank_rank: usize,
}

/// Unweighted PageRank by power iteration; dangling mass is spread uniformly.
/// Stops when the L1 change drops below [`PAGERANK_TOL`].
pub fn pagerank(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    if n == 0 {
        return Vec::new();
    }
    let uniform = 1.0 / n as f64;
    let mut pr = vec![uniform; n];
    let mut next = vec![0.0; n];
    for _ in 0..PAGERANK_MAX_ITERS {
        let mut dangling = 0.0;
        next.iter_mut().for_each(|v| *v = 0.0);
        for (i, &r) in pr.iter().enumerate() {
            let deg = g.neighbor_count(i);
            if deg == 0 {
                dangling += r;
            } else {
                let share = r / deg as f64;
                for (j, _) in g.neighbors(i) {
                    next[j] += share;
                }
            }
        }
        let teleport = (1.0 - PAGERANK_DAMPING) * uniform + PAGERANK_DAMPING * dangling * uniform;
        let mut delta = 0.0;
        for (nv, &old) in next.iter_mut().zip(&pr) {
            *nv = teleport + PAGERANK_DAMPING * *nv;
            delta += (*nv - old).abs();
        }
        std::mem::swap(&mut pr, &mut next);
        if delta < PAGERANK_TOL {
            break;
        }
    }
    let total: f64 = pr.iter().sum();
    pr.iter().map(|v| v / total).collect()
}

pub fn echo_chamber(inst: &Instance, i: usize) -> usize {
    let s = inst.exposure().signs();
    inst.graph().neighbors(i).filter(|&(j, _)| s[j] == s[i]).count()
}

fn rank<T: PartialOrd>(values: &[T], i: usize) -> usize {
    1 + values.iter().filter(|v| **v > values[i]).count()
}

/// Orders a selection the way a greedy pass restricted to it would add the
/// nodes: largest marginal gain first, ties to the lower index.
pub fn selection_order(p: &ObjectiveMatrix, selection: &FlipSet) -> Vec<usize> {
    let mut chosen = FlipSet::empty(p.n());
    let mut rest: Vec<usize> = selection.selected().to_vec();
    let mut order = Vec::with_capacity(rest.len());
    while !rest.is_empty() {
        let (pos, _) = rest
            .iter()
            .enumerate()
            .map(|(pos, &j)| (pos, marginal_gain(p, &chosen, j).expect("j is unselected")))
            .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        let j = rest.remove(pos);
        chosen.insert(p, 0.0, j).expect("j is unselected");
        order.push(j);
    }
    order
}

/// Profiles of `nodes`, in the given order.
pub fn node_profile(inst: &Instance, ids: &[String], nodes: &[usize]) -> Vec<NodeProfile> {
    let n = inst.node_count();
    let echo: Vec<usize> = (0..n).map(|i| echo_chamber(inst, i)).collect();
    let degree: Vec<usize> = (0..n).map(|i| inst.graph().neighbor_count(i)).collect();
    let pr = pagerank(inst.graph());
    nodes
        .iter()
        .map(|&i| NodeProfile {
            node: i,
            id: ids.get(i).cloned().unwrap_or_else(|| (i + 1).to_string()),
            echo_chamber: echo[i],
            degree: degree[i],
            pagerank: pr[i],
            echo_rank: rank(&echo, i),
            degree_rank: rank(&degree, i),
            pagerank_rank: rank(&pr, i),
        })
        .collect()
}
