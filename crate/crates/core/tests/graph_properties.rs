mod common;

use common::{random_exposure, random_graph, rng};
use divmax_core::{apply_flips, build_objective, diversity_index, objective_gain, Exposure, FlipSet, Graph};
use proptest::prelude::*;
use rand::Rng;

fn weighted(seed: u64, max_n: usize) -> (Graph, Exposure) {
    let mut r = rng(seed);
    let n = r.random_range(1..=max_n);
    let density = r.random_range(0.05..0.9);
    let g = random_graph(&mut r, n, density, |r| 2.0 - r.random_range(0.0..2.0));
    let s = random_exposure(&mut r, n);
    (g, s)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn gain_identity(seed in any::<u64>(), pick in any::<u64>()) {
        let (g, s) = weighted(seed, 50);
        let p = build_objective(&g, &s).unwrap();
        let n = g.node_count();
        let nodes: Vec<usize> = (0..n).filter(|i| pick.rotate_left(*i as u32) & 1 == 1).collect();
        let x = FlipSet::from_nodes(&p, &vec![1.0; n], &nodes).unwrap();
        let delta = diversity_index(&g, &apply_flips(&s, &x).unwrap()).unwrap() - diversity_index(&g, &s).unwrap();
        let gain = objective_gain(&p, &x).unwrap();
        prop_assert!((delta - 4.0 * gain).abs() <= 1e-9 * (1.0 + g.total_abs_weight()));
    }

    #[test]
    fn sign_symmetry(seed in any::<u64>()) {
        let (g, s) = weighted(seed, 40);
        prop_assert_eq!(diversity_index(&g, &s).unwrap(), diversity_index(&g, &s.negated()).unwrap());
    }

    #[test]
    fn nonnegative_and_zero_iff_constant_per_component(seed in any::<u64>()) {
        let (g, s) = weighted(seed, 30);
        let eta = diversity_index(&g, &s).unwrap();
        prop_assert!(eta >= 0.0);
        let constant = g.edges().iter().all(|&(i, j, _)| s.signs()[i] == s.signs()[j]);
        prop_assert_eq!(eta == 0.0, constant);
    }

    #[test]
    fn flipping_everything_changes_nothing(seed in any::<u64>()) {
        let (g, s) = weighted(seed, 40);
        let p = build_objective(&g, &s).unwrap();
        let total = p.quadratic(&vec![1.0; g.node_count()]);
        prop_assert!(total.abs() <= 1e-9 * (1.0 + g.total_abs_weight()));
    }

    #[test]
    fn trace_matches_edge_agreement(seed in any::<u64>()) {
        let (g, s) = weighted(seed, 40);
        let p = build_objective(&g, &s).unwrap();
        let trace: f64 = p.diag().iter().sum();
        let expected: f64 = 2.0 * g.edges().iter().map(|&(i, j, w)| w * s.value(i) * s.value(j)).sum::<f64>();
        prop_assert!((trace - expected).abs() <= 1e-9 * (1.0 + g.total_abs_weight()));
    }

    #[test]
    fn degrees_are_row_sums(seed in any::<u64>()) {
        let (g, _) = weighted(seed, 40);
        for i in 0..g.node_count() {
            let row: f64 = g.neighbors(i).map(|(_, w)| w).sum();
            prop_assert_eq!(row, g.degree(i));
        }
    }

    #[test]
    fn flips_stay_binary_and_invert(seed in any::<u64>(), pick in any::<u64>()) {
        let (g, s) = weighted(seed, 40);
        let p = build_objective(&g, &s).unwrap();
        let n = g.node_count();
        let nodes: Vec<usize> = (0..n).filter(|i| pick >> (i % 64) & 1 == 1).collect();
        let x = FlipSet::from_nodes(&p, &vec![1.0; n], &nodes).unwrap();
        let y = apply_flips(&s, &x).unwrap();
        for i in 0..n {
            prop_assert_eq!(y.signs()[i] == s.signs()[i], !x.contains(i));
        }
        prop_assert_eq!(apply_flips(&y, &x).unwrap(), s);
    }
}

#[test]
fn gain_identity_suite_of_one_thousand() {
    for seed in 0..1000u64 {
        let (g, s) = weighted(seed, 50);
        let p = build_objective(&g, &s).unwrap();
        let mut r = rng(seed ^ 0xabcdef);
        let n = g.node_count();
        let nodes: Vec<usize> = (0..n).filter(|_| r.random::<bool>()).collect();
        let x = FlipSet::from_nodes(&p, &vec![1.0; n], &nodes).unwrap();
        let delta = diversity_index(&g, &apply_flips(&s, &x).unwrap()).unwrap() - diversity_index(&g, &s).unwrap();
        assert!((delta - 4.0 * x.value()).abs() <= 1e-9 * (1.0 + g.total_abs_weight()), "seed {seed}");
    }
}
