use std::time::Instant;

use super::{check_budget, Scratch, SolveReport};
use crate::block::{block_mass, BlockTable, LogisticParams};
use crate::error::Result;
use crate::graph::NodeId;
use crate::walk::SampleStore;

/// The `k` candidates contained in the most (weight of) hit walks.
pub fn solve_topk(store: &SampleStore, params: &LogisticParams, k: usize) -> Result<SolveReport> {
    check_budget(store, k)?;
    let started = Instant::now();
    let table = BlockTable::for_store(*params, store)?;
    let mass = block_mass(store);
    let mut nodes = store.candidates();
    nodes.sort_by(|&a, &b| mass[b as usize].total_cmp(&mass[a as usize]).then(a.cmp(&b)));
    nodes.truncate(k);
    Ok(SolveReport::new(store, &table, nodes, started.elapsed()))
}

/// Plain greedy on the true objective: `k` rounds, each adding the node of
/// largest marginal gain. Gains are recomputed every round because the
/// objective is not submodular, so stale gains cannot be trusted as bounds.
pub fn solve_greedy(store: &SampleStore, params: &LogisticParams, k: usize) -> Result<SolveReport> {
    check_budget(store, k)?;
    let started = Instant::now();
    let table = BlockTable::for_store(*params, store)?;
    let (chosen, evaluations) = greedy_with_table(store, &table, k);
    let mut report = SolveReport::new(store, &table, chosen, started.elapsed());
    report.gain_evaluations = evaluations;
    Ok(report)
}

pub(crate) fn greedy_with_table(store: &SampleStore, table: &BlockTable, k: usize) -> (Vec<NodeId>, u64) {
    let candidates = store.candidates();
    let mut scratch = Scratch::new(store, table);
    while scratch.len() < k {
        match scratch.argmax(&candidates, false) {
            Some((v, _)) => scratch.add(v),
            None => break,
        }
    }
    (scratch.chosen, scratch.gain_evaluations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::oracle::build_exact_store;

    fn path_store() -> SampleStore {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)], false).unwrap();
        build_exact_store(&g, &[2], 2).unwrap().into_store()
    }

    #[test]
    fn topk_on_path() {
        let store = path_store();
        let p = LogisticParams::new(3.0, 1.0).unwrap();
        assert_eq!(solve_topk(&store, &p, 1).unwrap().chosen, vec![1]);
        assert_eq!(solve_topk(&store, &p, 2).unwrap().sorted_set(), vec![0, 1]);
        assert!(solve_topk(&store, &p, 3).is_err());
        assert!(solve_topk(&store, &p, 0).is_err());
    }

    #[test]
    fn greedy_on_path() {
        let store = path_store();
        let p = LogisticParams::new(3.0, 1.0).unwrap();
        let one = solve_greedy(&store, &p, 1).unwrap();
        assert_eq!(one.chosen, vec![1]);
        // f(1) = 1 / (1 + e^2)
        assert!((one.objective - 0.11920292202211755).abs() < 1e-9);
        assert!((one.blocking_percentage.unwrap() - 0.11920292202211755).abs() < 1e-9);

        let two = solve_greedy(&store, &p, 2).unwrap();
        assert_eq!(two.sorted_set(), vec![0, 1]);
        // u=0 walk sees both protectors, u=1 walk sees one.
        let expected = 0.5 * 0.2689414213699951 + 0.5 * 0.11920292202211755;
        assert!((two.objective - expected).abs() < 1e-9);
    }

    #[test]
    fn greedy_fills_with_zero_gain_nodes() {
        // Nodes 3 and 4 are unreachable from every rumor-bound walk.
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (3, 4)], false).unwrap();
        let store = build_exact_store(&g, &[2], 2).unwrap().into_store();
        let p = LogisticParams::new(3.0, 1.0).unwrap();
        let r = solve_greedy(&store, &p, 4).unwrap();
        assert_eq!(r.chosen, vec![1, 0, 3, 4]);
    }
}
