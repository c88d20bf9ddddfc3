#![allow(dead_code)]

use divmax_core::{Exposure, Graph, Instance, ObjectiveMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Erdős–Rényi graph with edge probability `p`; weights from `weight`.
pub fn random_graph(r: &mut ChaCha8Rng, n: usize, p: f64, mut weight: impl FnMut(&mut ChaCha8Rng) -> f64) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if r.random::<f64>() < p {
                edges.push((i, j, weight(r)));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

pub fn random_exposure(r: &mut ChaCha8Rng, n: usize) -> Exposure {
    Exposure::from_signs((0..n).map(|_| if r.random::<bool>() { 1 } else { -1 }).collect()).unwrap()
}

/// Unit-cost instance with small integer weights, so every objective value
/// is an exact integer in floating point.
pub fn integer_instance(seed: u64, max_n: usize, max_k: usize) -> (Instance, ObjectiveMatrix) {
    let mut r = rng(seed);
    let n = r.random_range(1..=max_n);
    let density = r.random_range(0.15..0.7);
    let g = random_graph(&mut r, n, density, |r| r.random_range(1..=3) as f64);
    let s = random_exposure(&mut r, n);
    let k = r.random_range(0..=max_k) as f64;
    let inst = Instance::with_unit_costs(g, s, k).unwrap();
    let p = inst.objective();
    (inst, p)
}

/// Unit-cost instance with real weights in (0, 2].
pub fn real_instance(seed: u64, max_n: usize, max_k: usize) -> (Instance, ObjectiveMatrix) {
    let mut r = rng(seed);
    let n = r.random_range(1..=max_n);
    let density = r.random_range(0.15..0.7);
    let g = random_graph(&mut r, n, density, |r| 2.0 - r.random_range(0.0..2.0));
    let s = random_exposure(&mut r, n);
    let k = r.random_range(0..=max_k) as f64;
    let inst = Instance::with_unit_costs(g, s, k).unwrap();
    let p = inst.objective();
    (inst, p)
}

/// Brute force over all `2ⁿ` selections.
pub fn brute_force(inst: &Instance, p: &ObjectiveMatrix) -> f64 {
    let n = inst.node_count();
    let mut best = 0.0_f64;
    for mask in 0u64..(1 << n) {
        let nodes: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let cost: f64 = nodes.iter().map(|&i| inst.costs()[i]).sum();
        if cost <= inst.budget() {
            best = best.max(p.quad_form_of(&nodes));
        }
    }
    best
}
