//! Randomized rounding shared by the relaxation pipelines.

use std::cmp::Ordering;

use rand::Rng;

use crate::graph::{FlipSet, Instance, ObjectiveMatrix};
use crate::greedy::{local_search, ratio_cmp, GreedyConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundingConfig {
    /// Independent samples; the best feasible one is kept.
    pub samples: usize,
    pub seed: u64,
    /// Bernoulli redraws per sample before falling back to repair.
    pub attempts_cap: usize,
    /// Run greedy local search from the best rounded selection.
    pub polish: bool,
    pub polish_iterations: usize,
}

impl RoundingConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        RoundingConfig { samples, seed, attempts_cap: 1000, polish: true, polish_iterations: 100 }
    }
}

impl Default for RoundingConfig {
    fn default() -> Self {
        RoundingConfig::new(100, 0)
    }
}

/// Draws `x̄_i ~ Bernoulli(z_i)` until `bᵀx̄ ≤ k`; after `attempts_cap`
/// failures the last draw is repaired.
pub(crate) fn bernoulli_feasible<R: Rng>(
    z: &[f64],
    inst: &Instance,
    p: &ObjectiveMatrix,
    attempts_cap: usize,
    rng: &mut R,
) -> Vec<usize> {
    let costs = inst.costs();
    let mut chosen = Vec::new();
    for _ in 0..attempts_cap.max(1) {
        chosen.clear();
        let mut spent = 0.0;
        for (i, &zi) in z.iter().enumerate() {
            if rng.random::<f64>() < zi {
                chosen.push(i);
                spent += costs[i];
            }
        }
        if spent <= inst.budget() {
            return chosen;
        }
    }
    repair(chosen, inst, p)
}

/// Drops selected nodes in ascending `P_ii / b_i` order until the budget holds.
pub(crate) fn repair(mut chosen: Vec<usize>, inst: &Instance, p: &ObjectiveMatrix) -> Vec<usize> {
    let costs = inst.costs();
    let diag = p.diag();
    chosen.sort_by(|&a, &b| match ratio_cmp(diag[a], costs[a], diag[b], costs[b]) {
        Ordering::Equal => a.cmp(&b),
        o => o,
    });
    let mut spent: f64 = chosen.iter().map(|&i| costs[i]).sum();
    let mut drop = 0;
    while spent > inst.budget() && drop < chosen.len() {
        spent -= costs[chosen[drop]];
        drop += 1;
    }
    let mut kept = chosen.split_off(drop);
    kept.sort_unstable();
    while kept.iter().map(|&i| costs[i]).sum::<f64>() > inst.budget() {
        // Incremental subtraction can round the wrong way; fall back to removing the largest cost.
        let (pos, _) = kept
            .iter()
            .enumerate()
            .max_by(|a, b| costs[*a.1].total_cmp(&costs[*b.1]))
            .expect("an over-budget selection is nonempty");
        kept.remove(pos);
    }
    kept
}

/// Best selection over `samples` draws, each produced by `sample(i)`, then
/// optionally polished by local search.
pub(crate) fn best_of<F>(inst: &Instance, p: &ObjectiveMatrix, cfg: &RoundingConfig, mut sample: F) -> FlipSet
where
    F: FnMut(u64) -> Vec<usize>,
{
    let costs = inst.costs();
    let mut best = FlipSet::empty(p.n());
    for i in 0..cfg.samples as u64 {
        let candidate = FlipSet::from_nodes(p, costs, &sample(i)).expect("indices come from 0..n");
        if candidate.value() > best.value() && inst.is_feasible(&candidate) {
            best = candidate;
        }
    }
    if cfg.polish {
        let gcfg = GreedyConfig::new(cfg.polish_iterations, cfg.seed);
        let polished = local_search(inst, p, &gcfg, &best).selection;
        if polished.value() > best.value() {
            best = polished;
        }
    }
    best
}
