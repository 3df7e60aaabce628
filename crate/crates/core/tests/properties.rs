use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rcic::block::{estimate_envelope_objective, estimate_objective};
use rcic::graph::load_edge_list;
use rcic::oracle::{build_exact_store, enumerate_walks, random_instance};
use rcic::solvers::{branch_and_bound, solve_greedy, BabOptions, BoundEstimator};
use rcic::walk::RumorSet;
use rcic::{build_sample_store, Graph, LogisticParams, NodeId, SampleConfig};

fn edges(max_nodes: u32) -> impl Strategy<Value = (usize, Vec<(NodeId, NodeId)>)> {
    (2..max_nodes).prop_flat_map(|n| (Just(n as usize), prop::collection::vec((0..n, 0..n), 1..40)))
}

fn instance() -> impl Strategy<Value = rcic::oracle::Instance> {
    any::<u64>().prop_map(|seed| random_instance(&mut ChaCha8Rng::seed_from_u64(seed), 7, 3))
}

fn params() -> impl Strategy<Value = LogisticParams> {
    (0.5..9.0f64, 0.3..4.0f64).prop_map(|(a, b)| LogisticParams::new(a, b).unwrap())
}

fn subset(n: usize) -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), n)
}

fn pick(mask: &[bool], pool: &[NodeId]) -> Vec<NodeId> {
    pool.iter().zip(mask).filter(|(_, &m)| m).map(|(&v, _)| v).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn edge_list_round_trip((n, e) in edges(30), directed in any::<bool>()) {
        prop_assume!(e.iter().any(|(u, v)| u != v));
        let g = Graph::from_edges(n, e, directed).unwrap();
        let mut text = Vec::new();
        g.write_edge_list(&mut text).unwrap();
        let back = load_edge_list(text.as_slice(), directed).unwrap();
        prop_assert_eq!(back.edge_count(), g.edge_count());
        let arcs = |g: &Graph| {
            let mut a: Vec<(u64, u64)> = (0..g.node_count() as NodeId)
                .flat_map(|u| g.adj(u).iter().map(move |&v| (g.original_id(u), g.original_id(v))))
                .collect();
            a.sort_unstable();
            a
        };
        prop_assert_eq!(arcs(&back), arcs(&g));
    }

    #[test]
    fn degrees_sum_to_twice_the_edges((n, e) in edges(40)) {
        let g = Graph::from_edges(n, e, false).unwrap();
        let total: usize = (0..n as NodeId).map(|u| g.degree(u)).sum();
        prop_assert_eq!(total, 2 * g.edge_count());
    }

    #[test]
    fn bfs_slices_are_nested((n, e) in edges(40), seed in 0u32..40, a in 0.05..1.0f64, b in 0.05..1.0f64) {
        let g = Graph::from_edges(n, e, false).unwrap();
        let seed = seed % n as u32;
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (_, small) = g.bfs_subgraph(seed, lo).unwrap();
        let (_, large) = g.bfs_subgraph(seed, hi).unwrap();
        prop_assert!(small.iter().all(|v| large.binary_search(v).is_ok()));
        prop_assert!(small.binary_search(&seed).is_ok());
    }

    #[test]
    fn sampled_prefixes_avoid_the_rumor(inst in instance(), seed in any::<u64>()) {
        let store = build_sample_store(&inst.graph, &inst.rumor, SampleConfig::new(inst.walk_length, 20, seed).unwrap()).unwrap();
        for w in 0..store.walk_count() {
            let prefix = store.walk_prefix(w);
            prop_assert!(prefix.iter().all(|v| !inst.rumor.contains(v)));
            prop_assert!(prefix.contains(&store.walk_start(w)));
        }
    }

    #[test]
    fn objective_is_monotone(inst in instance(), p in params(), mask in subset(7), extra in 0usize..7) {
        let store = build_exact_store(&inst.graph, &inst.rumor, inst.walk_length).unwrap().into_store();
        let pool = store.candidates();
        let set = pick(&mask, &pool);
        let v = pool[extra % pool.len()];
        let mut larger = set.clone();
        if !larger.contains(&v) {
            larger.push(v);
        }
        let small = estimate_objective(&store, &p, &set).unwrap();
        let big = estimate_objective(&store, &p, &larger).unwrap();
        prop_assert!(big >= small - 1e-12);
    }

    #[test]
    fn envelope_dominates_and_touches_at_the_anchor(inst in instance(), p in params(), a in subset(7), b in subset(7)) {
        let store = build_exact_store(&inst.graph, &inst.rumor, inst.walk_length).unwrap().into_store();
        let pool = store.candidates();
        let anchor = pick(&a, &pool);
        let mut set = anchor.clone();
        set.extend(pick(&b, &pool).into_iter().filter(|v| !anchor.contains(v)));
        let at_anchor = estimate_envelope_objective(&store, &p, &anchor, &anchor).unwrap();
        prop_assert!((at_anchor - estimate_objective(&store, &p, &anchor).unwrap()).abs() <= 1e-12);
        let env = estimate_envelope_objective(&store, &p, &anchor, &set).unwrap();
        prop_assert!(env >= estimate_objective(&store, &p, &set).unwrap() - 1e-9);
    }

    #[test]
    fn search_never_trails_greedy(inst in instance(), p in params(), k in 1usize..4, rho in 0.01..1.0f64) {
        let store = build_exact_store(&inst.graph, &inst.rumor, inst.walk_length).unwrap().into_store();
        let k = k.min(store.candidates().len());
        let greedy = solve_greedy(&store, &p, k).unwrap().objective;
        for estimator in [BoundEstimator::Greedy, BoundEstimator::Progressive { rho }] {
            let r = branch_and_bound(&store, &p, BabOptions::new(estimator, k)).unwrap();
            prop_assert_eq!(r.chosen.len(), k);
            prop_assert!(r.objective >= greedy - 1e-12);
        }
    }
}

/// Sampled hit frequencies stay within four standard errors of the exact
/// hitting probabilities for at least 99% of (node, seed) pairs.
#[test]
fn hit_frequencies_match_enumeration() {
    let g = Graph::from_edges(
        9,
        [
            (0, 1),
            (1, 2),
            (2, 3),
            (3, 4),
            (4, 5),
            (5, 6),
            (6, 7),
            (7, 8),
            (8, 0),
            (0, 4),
            (2, 7),
            (1, 6),
        ],
        false,
    )
    .unwrap();
    let rumor = [3, 8];
    let walk_length = 5;
    let mut exact = vec![0.0; g.node_count()];
    for w in enumerate_walks(&g, &rumor, walk_length).unwrap() {
        if w.hit {
            exact[w.start as usize] += w.probability;
        }
    }
    let samples = 400;
    let nodes = RumorSet::new(g.node_count(), &rumor).unwrap().complement();
    let (mut checked, mut outside) = (0, 0);
    for seed in 0..50 {
        let store = build_sample_store(&g, &rumor, SampleConfig::new(walk_length, samples, seed).unwrap()).unwrap();
        for &u in &nodes {
            let p = exact[u as usize];
            let freq = store.hit_count(u) as f64 / samples as f64;
            checked += 1;
            if (freq - p).abs() > 4.0 * (p * (1.0 - p) / samples as f64).sqrt() {
                outside += 1;
            }
        }
    }
    assert!(
        outside as f64 <= 0.01 * checked as f64,
        "{outside} of {checked} outside"
    );
}

/// Monte Carlo objectives approach the exact value as walks per node grow.
#[test]
fn monte_carlo_converges_to_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = LogisticParams::new(3.0, 1.0).unwrap();
    for _ in 0..5 {
        let inst = random_instance(&mut rng, 7, 3);
        let exact_store = build_exact_store(&inst.graph, &inst.rumor, inst.walk_length)
            .unwrap()
            .into_store();
        let set: Vec<NodeId> = exact_store.candidates().into_iter().step_by(2).collect();
        let exact = estimate_objective(&exact_store, &p, &set).unwrap();
        let error = |x: usize| {
            (0..8)
                .map(|seed| {
                    let s = build_sample_store(
                        &inst.graph,
                        &inst.rumor,
                        SampleConfig::new(inst.walk_length, x, seed).unwrap(),
                    )
                    .unwrap();
                    (estimate_objective(&s, &p, &set).unwrap() - exact).abs()
                })
                .sum::<f64>()
                / 8.0
        };
        let (coarse, fine) = (error(50), error(5000));
        assert!(
            fine <= coarse + 1e-9 && fine < 0.05 * inst.graph.node_count() as f64,
            "{coarse} -> {fine}"
        );
    }
}
