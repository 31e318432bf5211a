mod common;

use common::*;
use factin::automaton::{step, step_into_with, Configuration, ExcitationRule, NodeState};
use factin::graph::compute_stats;
use factin::par::Exec;
use factin::trajectory::{run_to_attractor, Fingerprinter, RunOptions, Termination};
use factin::MolecularGraph;
use proptest::prelude::*;

fn family() -> impl Strategy<Value = Family> {
    prop::sample::select(FAMILIES.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1200))]

    #[test]
    fn attractor_matches_full_history_oracle(
        fam in family(), n in 1usize..=12, gseed in any::<u64>(), sseed in any::<u64>(), ri in 0usize..RULES.len()
    ) {
        let edges = random_edges(fam, n, &mut rng(gseed));
        let adj = adjacency(n, &edges);
        let init = random_states(n, &mut rng(sseed));
        let g = graph(n, &edges);
        let got = run_to_attractor(&g, rule(RULES[ri]), &config(&init), &RunOptions::with_max_steps(5000)).unwrap();
        let want = oracle_attractor(&adj, RULES[ri], &init, 5000).expect("small graphs cycle quickly");
        prop_assert_eq!((got.transient_p, got.cycle_c), want);
        prop_assert_eq!(got.termination == Termination::Absorbing, got.cycle_c == 1);
        if got.termination == Termination::Absorbing {
            prop_assert_eq!(got.excitation_e, 0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn independent_of_fingerprint_function(
        fam in family(), n in 1usize..=40, gseed in any::<u64>(), sseed in any::<u64>(), ri in 0usize..RULES.len(), fseed in any::<u64>()
    ) {
        let edges = random_edges(fam, n, &mut rng(gseed));
        let g = graph(n, &edges);
        let c0 = config(&random_states(n, &mut rng(sseed)));
        let base = RunOptions::with_max_steps(20_000);
        let a = run_to_attractor(&g, rule(RULES[ri]), &c0, &base).unwrap();
        let b = run_to_attractor(&g, rule(RULES[ri]), &c0, &RunOptions { fingerprinter: Fingerprinter::new(fseed), ..base.clone() }).unwrap();
        let weak = run_to_attractor(&g, rule(RULES[ri]), &c0, &RunOptions { fingerprinter: Fingerprinter::truncated(fseed, 2), ..base.clone() }).unwrap();
        let brent = run_to_attractor(&g, rule(RULES[ri]), &c0, &RunOptions { history_limit_bytes: 0, ..base }).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&a, &weak);
        prop_assert_eq!(&a, &brent);
    }

    #[test]
    fn step_matches_transition_table(fam in family(), n in 1usize..=80, gseed in any::<u64>(), sseed in any::<u64>(), ri in 0usize..RULES.len()) {
        let edges = random_edges(fam, n, &mut rng(gseed));
        let adj = adjacency(n, &edges);
        let s = random_states(n, &mut rng(sseed));
        let got = step(&graph(n, &edges), rule(RULES[ri]), &config(&s)).unwrap();
        prop_assert_eq!(got.states(), oracle_step(&adj, RULES[ri], &s));
    }

    #[test]
    fn stats_match_floyd_warshall(fam in family(), n in 1usize..=50, gseed in any::<u64>()) {
        let edges = random_edges(fam, n, &mut rng(gseed));
        let adj = adjacency(n, &edges);
        let g = graph(n, &edges);
        let s = compute_stats(&g).unwrap();
        let (diam, mean, median) = oracle_distances(n, &adj);
        prop_assert_eq!(s.diameter_nodes, diam);
        prop_assert_eq!(s.diameter_path.len(), s.diameter_nodes);
        prop_assert!((s.mean_distance - mean).abs() < 1e-9);
        prop_assert_eq!(s.median_distance, median);
        prop_assert_eq!(s.degree_histogram.values().sum::<usize>(), n);
        // the reported path is a shortest path between its endpoints
        prop_assert!(s.diameter_path.windows(2).all(|w| g.has_edge(w[0], w[1])));
        let mut uniq = s.diameter_path.clone();
        uniq.sort_unstable();
        uniq.dedup();
        prop_assert_eq!(uniq.len(), s.diameter_path.len());
        // symmetric adjacency
        for u in 0..n {
            for &v in g.neighbors(u) {
                prop_assert!(g.has_edge(v as usize, u));
            }
        }
    }

    #[test]
    fn single_seed_dies_under_high_threshold(fam in family(), n in 1usize..=60, gseed in any::<u64>(), node in any::<prop::sample::Index>(), lo in 2u32..5) {
        let edges = random_edges(fam, n, &mut rng(gseed));
        let g = graph(n, &edges);
        prop_assume!(g.max_degree() <= 4);
        let mut c0 = Configuration::resting(n);
        c0.set(node.index(n), NodeState::Excited);
        let r = run_to_attractor(&g, ExcitationRule::new(lo, None).unwrap(), &c0, &RunOptions::for_graph(&g)).unwrap();
        prop_assert_eq!(r.termination, Termination::Absorbing);
        prop_assert!(r.transient_p <= 2);
    }
}

#[test]
fn ring_law_for_cycles_5_to_32() {
    for n in 5..=32 {
        let g = MolecularGraph::cycle(n);
        let mut c0 = Configuration::resting(n);
        c0.set(0, NodeState::Excited);
        c0.set(n - 1, NodeState::Refractory);
        let r = run_to_attractor(&g, ExcitationRule::A0, &c0, &RunOptions::for_graph(&g)).unwrap();
        assert_eq!((r.transient_p, r.cycle_c, r.excitation_e), (0, n as u64, 1), "C{n}");
    }
}

#[test]
fn parallel_kernel_is_bit_identical() {
    let n = 70_000;
    let edges = random_edges(Family::Connected, n, &mut rng(5));
    let g = graph(n, &edges);
    let mut c = config(&random_states(n, &mut rng(6)));
    for rule in [ExcitationRule::A0, ExcitationRule::A1, "2:3".parse().unwrap()] {
        let mut seq = Configuration::resting(n);
        let mut par = Configuration::resting(n);
        for _ in 0..5 {
            step_into_with(Exec::Sequential, &g, rule, &c, &mut seq).unwrap();
            step_into_with(Exec::Parallel, &g, rule, &c, &mut par).unwrap();
            assert_eq!(seq, par);
            c = seq.clone();
        }
    }
}
