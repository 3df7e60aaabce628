//! Brute-force ground truth for small instances.
//!
//! Walks are enumerated exhaustively as a tree of realizations, each with
//! its exact probability, instead of being sampled. Objectives computed
//! here go straight from that enumeration and the logistic formula and do
//! not touch the store or the solver code paths.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::block::{estimate_envelope_objective, LogisticParams};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::walk::{RumorSet, SampleStore, StoreOrigin, WeightedProfile};

/// Realizations a single enumeration may visit.
pub const ENUMERATION_BUDGET: u64 = 10_000_000;
/// Subsets [`exhaustive_optimum`] may score.
pub const COMBINATION_BUDGET: u64 = 1_000_000;

/// One distinct walk outcome from a start node, with its probability.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactWalk {
    pub start: NodeId,
    pub probability: f64,
    pub hit: bool,
    pub prefix: Vec<NodeId>,
}

struct Enumerator<'a> {
    graph: &'a Graph,
    rumor: &'a RumorSet,
    walk_length: usize,
    visited: Vec<NodeId>,
    outcomes: BTreeMap<(bool, Vec<NodeId>), f64>,
    realizations: u64,
}

impl Enumerator<'_> {
    fn record(&mut self, hit: bool, probability: f64) -> Result<()> {
        self.realizations += 1;
        if self.realizations > ENUMERATION_BUDGET {
            return Err(Error::BudgetExceeded(format!(
                "more than {ENUMERATION_BUDGET} walk realizations"
            )));
        }
        let mut prefix = self.visited.clone();
        prefix.sort_unstable();
        prefix.dedup();
        *self.outcomes.entry((hit, prefix)).or_insert(0.0) += probability;
        Ok(())
    }

    fn descend(&mut self, node: NodeId, step: usize, probability: f64) -> Result<()> {
        let next = self.graph.adj(node);
        if step == self.walk_length || next.is_empty() {
            return self.record(false, probability);
        }
        let p = probability / next.len() as f64;
        for &w in next {
            if self.rumor.contains(w) {
                self.record(true, p)?;
            } else {
                self.visited.push(w);
                self.descend(w, step + 1, p)?;
                self.visited.pop();
            }
        }
        Ok(())
    }
}

/// Every distinct outcome of a walk of at most `walk_length` steps from
/// each non-rumor node, sorted by start node.
pub fn enumerate_walks(graph: &Graph, rumor: &[NodeId], walk_length: usize) -> Result<Vec<ExactWalk>> {
    let rumor = RumorSet::new(graph.node_count(), rumor)?;
    let mut walks = Vec::new();
    let mut realizations = 0;
    for start in rumor.complement() {
        let mut e = Enumerator {
            graph,
            rumor: &rumor,
            walk_length,
            visited: vec![start],
            outcomes: BTreeMap::new(),
            realizations,
        };
        e.descend(start, 0, 1.0)?;
        realizations = e.realizations;
        walks.extend(e.outcomes.into_iter().map(|((hit, prefix), probability)| ExactWalk {
            start,
            probability,
            hit,
            prefix,
        }));
    }
    Ok(walks)
}

/// A store whose walks are all outcomes weighted by exact probability, so
/// every store-based estimate becomes an exact expectation.
#[derive(Debug, Clone)]
pub struct ExactStore {
    store: SampleStore,
    start_mass: Vec<f64>,
}

impl ExactStore {
    pub fn store(&self) -> &SampleStore {
        &self.store
    }

    pub fn into_store(self) -> SampleStore {
        self.store
    }

    /// Total probability of all outcomes per start node (hit or not).
    pub fn start_mass(&self, u: NodeId) -> f64 {
        self.start_mass[u as usize]
    }
}

pub fn build_exact_store(graph: &Graph, rumor: &[NodeId], walk_length: usize) -> Result<ExactStore> {
    let walks = enumerate_walks(graph, rumor, walk_length)?;
    let rumor = RumorSet::new(graph.node_count(), rumor)?;
    let mut start_mass = vec![0.0; graph.node_count()];
    let mut hit_counts = vec![0u32; graph.node_count()];
    let mut profiles = Vec::new();
    for w in walks {
        start_mass[w.start as usize] += w.probability;
        if w.hit {
            hit_counts[w.start as usize] += 1;
            profiles.push(WeightedProfile {
                start: w.start,
                weight: w.probability,
                prefix: w.prefix,
            });
        }
    }
    let store = SampleStore::from_weighted_profiles(StoreOrigin::Exact { walk_length }, rumor, profiles, hit_counts)?;
    Ok(ExactStore { store, start_mass })
}

fn logistic(params: &LogisticParams, count: usize) -> f64 {
    if count == 0 {
        0.0
    } else {
        1.0 / (1.0 + (params.alpha() - params.beta() * count as f64).exp())
    }
}

/// Exact `B(P | R)` over enumerated walks. `protectors` must be sorted.
pub fn objective_over_walks(walks: &[ExactWalk], params: &LogisticParams, protectors: &[NodeId]) -> f64 {
    walks
        .iter()
        .filter(|w| w.hit)
        .map(|w| {
            let c = w.prefix.iter().filter(|v| protectors.binary_search(v).is_ok()).count();
            w.probability * logistic(params, c)
        })
        .sum()
}

fn sorted(nodes: &[NodeId]) -> Vec<NodeId> {
    let mut s = nodes.to_vec();
    s.sort_unstable();
    s.dedup();
    s
}

/// Exact expected influence block of `protectors`.
pub fn exact_objective(
    graph: &Graph,
    params: &LogisticParams,
    rumor: &[NodeId],
    protectors: &[NodeId],
    walk_length: usize,
) -> Result<f64> {
    if protectors.iter().any(|p| rumor.contains(p)) {
        return Err(Error::InvalidProtectorSet("protectors overlap the rumor set".into()));
    }
    let walks = enumerate_walks(graph, rumor, walk_length)?;
    Ok(objective_over_walks(&walks, params, &sorted(protectors)))
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Exact optimum over all `k`-subsets of `V \ R`; ties go to the
/// lexicographically smallest set.
pub fn exhaustive_optimum(
    graph: &Graph,
    params: &LogisticParams,
    rumor: &[NodeId],
    k: usize,
    walk_length: usize,
) -> Result<(Vec<NodeId>, f64)> {
    let walks = enumerate_walks(graph, rumor, walk_length)?;
    let candidates = RumorSet::new(graph.node_count(), rumor)?.complement();
    let m = candidates.len();
    if k == 0 || k > m {
        return Err(Error::InvalidParameter(format!("budget must lie in 1..={m}, got {k}")));
    }
    if binomial(m as u64, k as u64) > COMBINATION_BUDGET {
        return Err(Error::BudgetExceeded(format!("C({m}, {k}) subsets")));
    }

    let mut idx: Vec<usize> = (0..k).collect();
    let mut best: Option<(Vec<NodeId>, f64)> = None;
    loop {
        let set: Vec<NodeId> = idx.iter().map(|&i| candidates[i]).collect();
        let value = objective_over_walks(&walks, params, &set);
        if best.as_ref().is_none_or(|(_, b)| value > *b) {
            best = Some((set, value));
        }
        // Next combination in lexicographic order.
        let Some(pos) = (0..k).rev().find(|&i| idx[i] != i + m - k) else {
            break;
        };
        idx[pos] += 1;
        for j in pos + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
    Ok(best.expect("at least one subset"))
}

/// A small random instance for property searches.
#[derive(Debug, Clone)]
pub struct Instance {
    pub graph: Graph,
    pub rumor: Vec<NodeId>,
    pub walk_length: usize,
}

/// Random graph on `3..=max_nodes` nodes with edge density drawn from
/// [0.25, 0.65], a rumor set of one or two nodes, and walk length
/// `1..=max_walk_length`.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, max_nodes: usize, max_walk_length: usize) -> Instance {
    loop {
        let n = rng.random_range(3..=max_nodes);
        let density = rng.random_range(0.25..0.65);
        let directed = rng.random_bool(0.2);
        let mut edges = Vec::new();
        for u in 0..n as NodeId {
            for v in 0..n as NodeId {
                if (directed && u != v || u < v) && rng.random_bool(density) {
                    edges.push((u, v));
                }
            }
        }
        if edges.is_empty() {
            continue;
        }
        let graph = Graph::from_edges(n, edges, directed).expect("ids in range");
        let mut nodes: Vec<NodeId> = (0..n as NodeId).collect();
        nodes.shuffle(rng);
        let rumor_size = rng.random_range(1..=2.min(n - 2));
        let mut rumor = nodes[..rumor_size].to_vec();
        rumor.sort_unstable();
        return Instance {
            graph,
            rumor,
            walk_length: rng.random_range(1..=max_walk_length),
        };
    }
}

/// Subset of `pool` keeping each node with a probability drawn from `keep`.
fn random_subset<R: Rng + ?Sized>(rng: &mut R, pool: &[NodeId], keep: std::ops::Range<f64>) -> Vec<NodeId> {
    let p = rng.random_range(keep);
    pool.iter().copied().filter(|_| rng.random_bool(p)).collect()
}

fn union(a: &[NodeId], b: &[NodeId]) -> Vec<NodeId> {
    let mut s = a.to_vec();
    s.extend_from_slice(b);
    sorted(&s)
}

/// Sets `A ⊆ B` and `v ∉ B` whose gains violate diminishing returns.
#[derive(Debug, Clone, Serialize)]
pub struct SubmodularityWitness {
    pub node_count: usize,
    pub edges: Vec<(NodeId, NodeId)>,
    pub directed: bool,
    pub rumor: Vec<NodeId>,
    pub walk_length: usize,
    /// Envelope anchor; empty for the plain objective.
    pub anchor: Vec<NodeId>,
    pub smaller: Vec<NodeId>,
    pub larger: Vec<NodeId>,
    pub node: NodeId,
    pub gain_smaller: f64,
    pub gain_larger: f64,
}

fn edges_of(g: &Graph) -> Vec<(NodeId, NodeId)> {
    (0..g.node_count() as NodeId)
        .flat_map(|u| g.adj(u).iter().map(move |&v| (u, v)))
        .filter(|&(u, v)| g.is_directed() || u < v)
        .collect()
}

struct Probe {
    anchor: Vec<NodeId>,
    smaller: Vec<NodeId>,
    larger: Vec<NodeId>,
    node: NodeId,
}

/// Draws `anchor ⊆ smaller ⊆ larger` and `node ∉ larger` from the candidates.
fn draw_probe<R: Rng + ?Sized>(rng: &mut R, inst: &Instance, with_anchor: bool) -> Option<Probe> {
    let mut pool = RumorSet::new(inst.graph.node_count(), &inst.rumor).ok()?.complement();
    if pool.len() < 2 {
        return None;
    }
    let node = pool.remove(rng.random_range(0..pool.len()));
    let larger = random_subset(rng, &pool, 0.2..0.9);
    let smaller = random_subset(rng, &larger, 0.0..0.8);
    let anchor = if with_anchor {
        random_subset(rng, &smaller, 0.0..1.0)
    } else {
        Vec::new()
    };
    Some(Probe {
        anchor,
        smaller,
        larger,
        node,
    })
}

fn witness(inst: &Instance, probe: Probe, gain_smaller: f64, gain_larger: f64) -> SubmodularityWitness {
    SubmodularityWitness {
        node_count: inst.graph.node_count(),
        edges: edges_of(&inst.graph),
        directed: inst.graph.is_directed(),
        rumor: inst.rumor.clone(),
        walk_length: inst.walk_length,
        anchor: probe.anchor,
        smaller: probe.smaller,
        larger: probe.larger,
        node: probe.node,
        gain_smaller,
        gain_larger,
    }
}

/// Random search for a diminishing-returns violation of the exact objective
/// on graphs of at most 8 nodes and walks of at most 3 steps.
pub fn find_submodularity_violation<R: Rng + ?Sized>(
    params: &LogisticParams,
    trials: usize,
    rng: &mut R,
) -> Option<SubmodularityWitness> {
    for _ in 0..trials {
        let inst = random_instance(rng, 8, 3);
        let Some(probe) = draw_probe(rng, &inst, false) else {
            continue;
        };
        let walks = enumerate_walks(&inst.graph, &inst.rumor, inst.walk_length).ok()?;
        let value = |set: &[NodeId]| objective_over_walks(&walks, params, &sorted(set));
        let with = |set: &[NodeId]| union(set, &[probe.node]);
        let gain_smaller = value(&with(&probe.smaller)) - value(&probe.smaller);
        let gain_larger = value(&with(&probe.larger)) - value(&probe.larger);
        if gain_larger > gain_smaller + 1e-9 {
            return Some(witness(&inst, probe, gain_smaller, gain_larger));
        }
    }
    None
}

/// The same search against the envelope objective anchored at a random
/// subset of the smaller set. Any witness found is a bug.
pub fn find_envelope_submodularity_violation<R: Rng + ?Sized>(
    params: &LogisticParams,
    trials: usize,
    rng: &mut R,
) -> Result<Option<SubmodularityWitness>> {
    for _ in 0..trials {
        let inst = random_instance(rng, 8, 3);
        let Some(probe) = draw_probe(rng, &inst, true) else {
            continue;
        };
        let exact = build_exact_store(&inst.graph, &inst.rumor, inst.walk_length)?;
        let value = |set: &[NodeId]| estimate_envelope_objective(exact.store(), params, &probe.anchor, set);
        let with = |set: &[NodeId]| union(set, &[probe.node]);
        let gain_smaller = value(&with(&probe.smaller))? - value(&probe.smaller)?;
        let gain_larger = value(&with(&probe.larger))? - value(&probe.larger)?;
        if gain_larger > gain_smaller + 1e-9 {
            return Ok(Some(witness(&inst, probe, gain_smaller, gain_larger)));
        }
    }
    Ok(None)
}

/// A probe where the envelope fell below the objective, or missed it at
/// the anchor itself.
#[derive(Debug, Clone, Serialize)]
pub struct DominanceCounterexample {
    pub node_count: usize,
    pub edges: Vec<(NodeId, NodeId)>,
    pub directed: bool,
    pub rumor: Vec<NodeId>,
    pub walk_length: usize,
    pub anchor: Vec<NodeId>,
    pub protectors: Vec<NodeId>,
    pub envelope: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct DominanceSummary {
    pub probes: usize,
    pub anchor_probes: usize,
    /// Smallest `envelope - objective` seen on strict supersets.
    pub min_margin: f64,
    /// Largest `|envelope - objective|` seen at the anchor.
    pub max_anchor_error: f64,
}

/// Compares the envelope objective (through the store) with the exact
/// objective (through enumeration) on random anchors and supersets.
/// About one probe in five uses `P = P^a` and must match to 1e-12.
pub fn check_envelope_dominance<R: Rng + ?Sized>(
    params: &LogisticParams,
    trials: usize,
    rng: &mut R,
) -> Result<std::result::Result<DominanceSummary, DominanceCounterexample>> {
    let mut summary = DominanceSummary {
        min_margin: f64::INFINITY,
        ..Default::default()
    };
    for _ in 0..trials {
        let inst = random_instance(rng, 8, 3);
        let pool = RumorSet::new(inst.graph.node_count(), &inst.rumor)?.complement();
        let anchor = random_subset(rng, &pool, 0.0..0.6);
        let at_anchor = rng.random_bool(0.2);
        let protectors = if at_anchor {
            anchor.clone()
        } else {
            union(&anchor, &random_subset(rng, &pool, 0.1..0.9))
        };
        let walks = enumerate_walks(&inst.graph, &inst.rumor, inst.walk_length)?;
        let objective = objective_over_walks(&walks, params, &protectors);
        let exact = build_exact_store(&inst.graph, &inst.rumor, inst.walk_length)?;
        let envelope = estimate_envelope_objective(exact.store(), params, &anchor, &protectors)?;

        summary.probes += 1;
        let failed = if at_anchor {
            summary.anchor_probes += 1;
            let err = (envelope - objective).abs();
            summary.max_anchor_error = summary.max_anchor_error.max(err);
            err > 1e-12
        } else {
            summary.min_margin = summary.min_margin.min(envelope - objective);
            envelope < objective - 1e-9
        };
        if failed {
            return Ok(Err(DominanceCounterexample {
                node_count: inst.graph.node_count(),
                edges: edges_of(&inst.graph),
                directed: inst.graph.is_directed(),
                rumor: inst.rumor,
                walk_length: inst.walk_length,
                anchor,
                protectors,
                envelope,
                objective,
            }));
        }
    }
    Ok(Ok(summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn path3() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2)], false).unwrap()
    }

    #[test]
    fn path_enumeration() {
        let walks = enumerate_walks(&path3(), &[2], 2).unwrap();
        // u=0: {0,1} hit 0.5, {0,1} miss 0.5; u=1: {1} hit 0.5, {0,1} miss 0.5.
        assert_eq!(walks.len(), 4);
        let hit: Vec<_> = walks
            .iter()
            .filter(|w| w.hit)
            .map(|w| (w.start, w.prefix.clone(), w.probability))
            .collect();
        assert_eq!(hit, vec![(0, vec![0, 1], 0.5), (1, vec![1], 0.5)]);
    }

    #[test]
    fn path_exact_objectives() {
        let p = LogisticParams::new(3.0, 1.0).unwrap();
        let g = path3();
        let f1 = 1.0 / (1.0 + 2f64.exp());
        assert!((exact_objective(&g, &p, &[2], &[1], 2).unwrap() - f1).abs() < 1e-12);
        assert!((exact_objective(&g, &p, &[2], &[0], 2).unwrap() - 0.5 * f1).abs() < 1e-12);
        assert_eq!(exact_objective(&g, &p, &[2], &[], 2).unwrap(), 0.0);
        assert!(exact_objective(&g, &p, &[2], &[2], 2).is_err());
    }

    #[test]
    fn probabilities_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let inst = random_instance(&mut rng, 8, 4);
            let exact = build_exact_store(&inst.graph, &inst.rumor, inst.walk_length).unwrap();
            for u in exact.store().candidates() {
                assert!((exact.start_mass(u) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exhaustive_on_path() {
        let p = LogisticParams::new(3.0, 1.0).unwrap();
        let (set, value) = exhaustive_optimum(&path3(), &p, &[2], 1, 2).unwrap();
        assert_eq!(set, vec![1]);
        assert!((value - 0.11920292202211755).abs() < 1e-9);
        let (set, _) = exhaustive_optimum(&path3(), &p, &[2], 2, 2).unwrap();
        assert_eq!(set, vec![0, 1]);
        assert!(exhaustive_optimum(&path3(), &p, &[2], 3, 2).is_err());
    }

    #[test]
    fn full_set_is_the_apex() {
        let p = LogisticParams::new(3.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let inst = random_instance(&mut rng, 7, 3);
            let walks = enumerate_walks(&inst.graph, &inst.rumor, inst.walk_length).unwrap();
            let all = RumorSet::new(inst.graph.node_count(), &inst.rumor)
                .unwrap()
                .complement();
            let apex = objective_over_walks(&walks, &p, &all);
            for _ in 0..10 {
                let s = random_subset(&mut rng, &all, 0.3..0.7);
                assert!(objective_over_walks(&walks, &p, &s) <= apex + 1e-12);
            }
        }
    }

    #[test]
    fn optimum_invariant_under_relabeling() {
        let p = LogisticParams::new(3.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let inst = random_instance(&mut rng, 7, 3);
            let n = inst.graph.node_count();
            let mut perm: Vec<NodeId> = (0..n as NodeId).collect();
            perm.shuffle(&mut rng);
            let edges: Vec<_> = edges_of(&inst.graph)
                .into_iter()
                .map(|(u, v)| (perm[u as usize], perm[v as usize]))
                .collect();
            let relabeled = Graph::from_edges(n, edges, inst.graph.is_directed()).unwrap();
            let rumor: Vec<_> = inst.rumor.iter().map(|&r| perm[r as usize]).collect();
            let k = 2.min(n - inst.rumor.len());
            let (_, a) = exhaustive_optimum(&inst.graph, &p, &inst.rumor, k, inst.walk_length).unwrap();
            let (_, b) = exhaustive_optimum(&relabeled, &p, &rumor, k, inst.walk_length).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn enumeration_budget_guard() {
        let n = 12;
        let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let g = Graph::from_edges(n as usize, edges, false).unwrap();
        assert!(matches!(enumerate_walks(&g, &[0], 8), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn no_witness_with_one_candidate() {
        let g = Graph::from_edges(2, [(0, 1)], false).unwrap();
        let inst = Instance {
            graph: g,
            rumor: vec![1],
            walk_length: 2,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(draw_probe(&mut rng, &inst, false).is_none());
    }

    #[test]
    fn finds_objective_violation_but_not_envelope_one() {
        let p = LogisticParams::new(3.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = find_submodularity_violation(&p, 10_000, &mut rng).expect("witness");
        assert!(w.gain_larger > w.gain_smaller);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!(find_envelope_submodularity_violation(&p, 500, &mut rng)
            .unwrap()
            .is_none());
    }

    #[test]
    fn dominance_holds() {
        let p = LogisticParams::new(3.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let summary = check_envelope_dominance(&p, 500, &mut rng).unwrap().unwrap();
        assert_eq!(summary.probes, 500);
        assert!(summary.anchor_probes > 0);
    }
}
