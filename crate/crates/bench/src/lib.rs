//! Shared instance builders for the benchmarks.

use divmax_core::{Instance, ObjectiveMatrix};
use divmax_harness::{gen_two_community, karate};

/// Karate club with budget `k`, plus its objective matrix.
pub fn karate_instance(k: f64) -> (Instance, ObjectiveMatrix) {
    let inst = karate(k).instance;
    let p = inst.objective();
    (inst, p)
}

/// Two-community graph with average degree close to 27 whatever `n` is,
/// budget `k`.
pub fn two_community(n: usize, k: f64, seed: u64) -> (Instance, ObjectiveMatrix) {
    let half = (n / 2) as f64;
    let p_in = (25.0 / half).min(1.0);
    let p_out = (2.0 / half).min(p_in);
    let inst = gen_two_community(n, p_in, p_out, seed).unwrap().with_budget(k).unwrap();
    let p = inst.objective();
    (inst, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builders() {
        let (inst, p) = karate_instance(3.0);
        assert_eq!((inst.node_count(), p.n(), inst.budget()), (34, 34, 3.0));
        let (inst, _) = two_community(2000, 20.0, 1);
        let avg = 2.0 * inst.graph().edge_count() as f64 / 2000.0;
        assert!((avg - 27.0).abs() < 2.0, "average degree {avg}");
    }
}
