//! Instance generators: two-community graphs, random exposures, the
//! subset-sum reduction and the embedded Karate club.

use rand::Rng;
use rand_distr::{Distribution, Geometric};

use divmax_core::rng::{self, StreamRng};
use divmax_core::{Exposure, Graph, Instance};

use crate::error::{HarnessError, Result};
use crate::io::{parse_instance, LoadedInstance};

const KARATE_EDGES: &str = include_str!("../fixtures/karate.edges");
const KARATE_EXPOSURE: &str = include_str!("../fixtures/karate.exposure");

/// Zachary's karate club (34 nodes, 78 edges) with the two factions as
/// exposure. Node ids are the usual 1-based labels.
pub fn karate(budget: f64) -> LoadedInstance {
    parse_instance(("karate.edges", KARATE_EDGES), ("karate.exposure", KARATE_EXPOSURE), None, budget)
        .expect("embedded fixture is valid")
}

/// Failures before the next success, or `None` when no success ever comes.
fn skip_sampler(p: f64) -> Option<Geometric> {
    (p > 0.0).then(|| Geometric::new(p).expect("probability checked by caller"))
}

/// Geometric-skip Bernoulli sampling over the pairs `(i, j)` with `j` in
/// each row's range, visited row by row.
fn sample_pairs(
    rows: impl Iterator<Item = (usize, std::ops::Range<usize>)>,
    p: f64,
    rng: &mut StreamRng,
    out: &mut Vec<(usize, usize, f64)>,
) {
    let Some(geo) = skip_sampler(p) else { return };
    let mut skip = geo.sample(rng);
    for (i, range) in rows {
        let mut j = range.start as u64;
        let end = range.end as u64;
        loop {
            if skip >= end - j {
                skip -= end - j;
                break;
            }
            j += skip;
            out.push((i, j as usize, 1.0));
            j += 1;
            skip = geo.sample(rng);
        }
    }
}

/// Two equal blocks with intra-block edge probability `p_in` and inter-block
/// probability `p_out`. Block A (the first half) gets exposure +1 and block B
/// gets -1.
pub fn gen_two_community(n: usize, p_in: f64, p_out: f64, seed: u64) -> Result<Instance> {
    let valid = |p: f64| (0.0..=1.0).contains(&p);
    if !(valid(p_in) && valid(p_out) && p_out <= p_in) {
        return Err(HarnessError::InvalidProbability { p_in, p_out });
    }
    if n % 2 != 0 {
        return Err(HarnessError::OddNodeCount(n));
    }
    let h = n / 2;
    let mut edges = Vec::new();
    sample_pairs((0..h).map(|i| (i, i + 1..h)), p_in, &mut rng::stream(seed, 0), &mut edges);
    sample_pairs((h..n).map(|i| (i, i + 1..n)), p_in, &mut rng::stream(seed, 1), &mut edges);
    sample_pairs((0..h).map(|i| (i, h..n)), p_out, &mut rng::stream(seed, 2), &mut edges);
    edges.sort_by_key(|&(u, v, _)| (u, v));
    let graph = Graph::from_edges(n, edges)?;
    let signs = (0..n).map(|i| if i < h { 1 } else { -1 }).collect();
    Ok(Instance::with_unit_costs(graph, Exposure::from_signs(signs)?, 0.0)?)
}

/// Same graph, costs and budget; each exposure drawn uniformly from ±1.
pub fn gen_random_exposure(inst: &Instance, seed: u64) -> Instance {
    let mut rng = rng::stream(seed, 0);
    let signs = (0..inst.node_count()).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
    inst.with_exposure(Exposure::from_signs(signs).expect("signs are ±1")).expect("lengths match")
}

/// Reduction from subset sum: a yes-instance (some subset of `items` sums to
/// `target`) has QBK optimum 1, a no-instance has optimum 0.
///
/// Star with center 0, leaves `1..=n` joined by weight `-m_i` and leaf `n+1`
/// by weight `A - M + 1` (`A = Σ m_i`). Costs are `(0, m, M + 1)`, the budget
/// is `M` and all exposures are +1.
pub fn gen_subsetsum(items: &[u64], target: u64) -> Result<Instance> {
    if target == 0 || items.is_empty() || items.contains(&0) {
        return Err(HarnessError::NonPositiveInput);
    }
    let n = items.len();
    let a: u64 = items.iter().sum();
    let mut edges: Vec<(usize, usize, f64)> = items.iter().enumerate().map(|(i, &m)| (0, i + 1, -(m as f64))).collect();
    edges.push((0, n + 1, a as f64 - target as f64 + 1.0));
    let graph = Graph::from_edges(n + 2, edges)?;
    let mut costs = vec![0.0];
    costs.extend(items.iter().map(|&m| m as f64));
    costs.push(target as f64 + 1.0);
    Ok(Instance::new(graph, Exposure::uniform(n + 2, 1), costs, target as f64)?)
}
