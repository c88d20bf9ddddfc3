use proptest::prelude::*;

use divmax_core::report::Algorithm;
use divmax_core::{normalized_index, FlipSet};
use divmax_harness::bench::write_report;
use divmax_harness::profile::echo_chamber;
use divmax_harness::{
    gen_random_exposure, gen_subsetsum, gen_two_community, karate, node_profile, pagerank, run_benchmark,
    DatasetSpec, KSpec, OutputFormat, RunConfig,
};

#[test]
fn random_exposure_mean_index_on_karate() {
    let k = karate(0.0).instance;
    let mean: f64 = (0..1000u64)
        .map(|seed| {
            let d = gen_random_exposure(&k, seed);
            normalized_index(d.graph(), d.exposure()).unwrap()
        })
        .sum::<f64>()
        / 1000.0;
    assert!((mean - 39.0).abs() <= 3.9, "mean {mean}");
}

#[test]
fn karate_profile_ranks() {
    let k = karate(3.0);
    let all: Vec<usize> = (0..34).collect();
    let prof = node_profile(&k.instance, &k.ids, &all);
    let top_degree: Vec<&str> = prof.iter().filter(|p| p.degree_rank == 1).map(|p| p.id.as_str()).collect();
    assert_eq!(top_degree, vec!["34"]);
    assert!((prof.iter().map(|p| p.pagerank).sum::<f64>() - 1.0).abs() < 1e-8);
    for p in &prof {
        assert!(p.echo_chamber <= p.degree);
    }
}

#[test]
fn bench_rows_cover_every_combination() {
    let cfg = RunConfig {
        datasets: vec![DatasetSpec::Karate, DatasetSpec::KarateRandom(2)],
        algorithms: Algorithm::ALL.to_vec(),
        ks: vec![KSpec::Fraction(0.1), KSpec::Absolute(2.0)],
        seeds: vec![1, 2],
        record_timing: false,
        ..RunConfig::default()
    };
    let rows = run_benchmark(&cfg).unwrap();
    // 3 deterministic + 3 randomized × 2 seeds, per (dataset, k)
    assert_eq!(rows.len(), 2 * 2 * 9);
    for r in &rows {
        assert!(r.error.is_none() && r.feasible && r.verified, "{r:?}");
        assert!(r.k == 3.0 || r.k == 2.0);
    }
    let exact: Vec<f64> = rows.iter().filter(|r| r.algorithm == "enumerate").map(|r| r.value.unwrap()).collect();
    for r in &rows {
        let group = rows.iter().position(|x| x.dataset == r.dataset && x.k == r.k).unwrap() / 9;
        assert!(r.value.unwrap() <= exact[group] + 1e-9);
        if let Some(b) = r.bound_index {
            assert!(b >= exact[group] - 1e-6);
        }
    }
    let json = write_report(&rows, OutputFormat::Json);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), rows.len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fractional_k_floors(f in 0.0f64..1.0, n in 1usize..500) {
        let k = KSpec::Fraction(f).resolve(n);
        prop_assert_eq!(k, (f * n as f64).floor());
        prop_assert!(k <= n as f64 && k.fract() == 0.0);
    }

    #[test]
    fn two_community_is_deterministic_and_labelled(half in 1usize..40, p_out in 0.0f64..0.5, extra in 0.0f64..0.5, seed: u64) {
        let n = 2 * half;
        let p_in = p_out + extra;
        let a = gen_two_community(n, p_in, p_out, seed).unwrap();
        prop_assert_eq!(&a, &gen_two_community(n, p_in, p_out, seed).unwrap());
        prop_assert_eq!(a.exposure().count_positive(), half);
        let cross = a.graph().edges().iter().filter(|&&(u, v, _)| (u < half) != (v < half)).count();
        prop_assert_eq!(a.base_index_normalized(), cross as f64);
    }

    #[test]
    fn profiles_are_consistent(half in 2usize..20, seed: u64, pick in 0usize..40) {
        let inst = gen_random_exposure(&gen_two_community(2 * half, 0.4, 0.1, seed).unwrap(), seed);
        let node = pick % inst.node_count();
        let prof = node_profile(&inst, &[], &[node]);
        prop_assert!(prof[0].echo_chamber <= prof[0].degree);
        prop_assert_eq!(prof[0].echo_chamber, echo_chamber(&inst, node));
        prop_assert!((pagerank(inst.graph()).iter().sum::<f64>() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn subsetsum_value_formula(items in proptest::collection::vec(1u64..8, 1..5), target in 1u64..20, mask: u8) {
        // Flipping the center and the item leaves in S gives gain Σ_S m_i - M + 1.
        let inst = gen_subsetsum(&items, target).unwrap();
        let p = inst.objective();
        let n = items.len();
        let subset: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let sum: u64 = subset.iter().map(|&i| items[i]).sum();
        let mut nodes: Vec<usize> = subset.iter().map(|&i| i + 1).collect();
        nodes.push(0);
        let x = FlipSet::from_nodes(&p, inst.costs(), &nodes).unwrap();
        prop_assert_eq!(x.value(), sum as f64 - target as f64 + 1.0);
    }
}
