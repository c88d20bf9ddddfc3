mod common;

use common::{integer_instance, real_instance, rng};
use divmax_core::exact::{enumerate_exact, DEFAULT_ENUMERATION_LIMIT};
use divmax_core::{i_greedy, s_greedy, Exposure, GreedyConfig, Instance};
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn outputs_are_feasible_under_random_costs(seed in any::<u64>()) {
        let (inst, _) = real_instance(seed, 25, 6);
        let mut r = rng(seed.wrapping_add(1));
        let costs: Vec<f64> = (0..inst.node_count())
            .map(|_| if r.random::<f64>() < 0.1 { 0.0 } else { r.random_range(0.1..3.0) })
            .collect();
        let inst = Instance::new(inst.graph().clone(), inst.exposure().clone(), costs, r.random_range(0.0..6.0)).unwrap();
        let p = inst.objective();
        let sg = s_greedy(&inst, &p);
        let ig = i_greedy(&inst, &p, &GreedyConfig::new(10, seed));
        prop_assert!(inst.is_feasible(&sg.selection));
        prop_assert!(inst.is_feasible(&ig.selection));
        prop_assert!(ig.gain >= 0.0);
    }

    #[test]
    fn i_greedy_is_deterministic(seed in any::<u64>()) {
        let (inst, p) = real_instance(seed, 30, 8);
        let cfg = GreedyConfig::new(15, seed);
        let a = i_greedy(&inst, &p, &cfg);
        let b = i_greedy(&inst, &p, &cfg);
        prop_assert_eq!(a.selection.selected(), b.selection.selected());
        prop_assert_eq!(a.gain.to_bits(), b.gain.to_bits());
    }

    #[test]
    fn incumbent_never_decreases_with_iterations(seed in any::<u64>()) {
        let (inst, p) = real_instance(seed, 20, 6);
        let mut last = f64::NEG_INFINITY;
        for iters in [1, 2, 5, 10, 20] {
            let v = i_greedy(&inst, &p, &GreedyConfig::new(iters, seed)).gain;
            prop_assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn cached_value_matches_scratch(seed in any::<u64>()) {
        let (inst, p) = real_instance(seed, 30, 8);
        let r = i_greedy(&inst, &p, &GreedyConfig::new(10, seed));
        let scratch = p.quad_form_of(r.selection.selected());
        prop_assert!((scratch - r.gain).abs() <= 1e-9 * (1.0 + p.scale()));
    }
}

#[test]
fn i_greedy_dominates_s_greedy_on_small_instances() {
    let total = 500;
    let mut dominated = 0;
    for seed in 0..total {
        let (inst, p) = integer_instance(seed, 12, 4);
        let opt = enumerate_exact(&inst, &p, DEFAULT_ENUMERATION_LIMIT).unwrap().gain;
        let sg = s_greedy(&inst, &p).gain;
        let ig = i_greedy(&inst, &p, &GreedyConfig::new(50, seed)).gain;
        assert!(sg <= opt && ig <= opt, "seed {seed}: heuristics above the optimum");
        if ig >= sg {
            dominated += 1;
        }
    }
    assert!(dominated * 100 >= total * 95, "{dominated} of {total}");
}

#[test]
fn zero_cost_positive_nodes_come_first() {
    let g = divmax_core::Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
    let inst = Instance::new(g, Exposure::uniform(3, 1), vec![1.0, 5.0, 0.0], 1.0).unwrap();
    let p = inst.objective();
    let r = s_greedy(&inst, &p);
    assert_eq!(r.selection.selected(), &[0, 2]);
}
