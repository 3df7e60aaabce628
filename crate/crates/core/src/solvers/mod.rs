//! Protector selection: TopK and Greedy baselines, the envelope bound
//! estimators and the branch-and-bound driver built on them.

mod bab;
mod bound;
mod heuristics;

use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::block::{self, BlockTable};
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::walk::SampleStore;

pub use bab::{branch_and_bound, BabOptions, BoundEstimator};
pub(crate) use bound::check_rho;
pub use bound::{pro_sam_compute_bound, pro_sam_compute_bound_within, sam_compute_bound, sam_compute_bound_within};
pub use heuristics::{solve_greedy, solve_topk};

/// Budget and optional caps on a branch-and-bound search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverLimits {
    pub budget: usize,
    pub node_expansion_cap: Option<usize>,
    pub wall_time_cap: Option<Duration>,
}

impl SolverLimits {
    pub fn new(budget: usize) -> Self {
        Self {
            budget,
            node_expansion_cap: None,
            wall_time_cap: None,
        }
    }
}

/// A completed protector set with its objective and envelope value.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundResult {
    /// Anchor nodes followed by the added nodes in selection order.
    pub protectors: Vec<NodeId>,
    /// `B(P | R)` of the completed set.
    pub lower: f64,
    /// Envelope value of the completed set, anchored at the input set.
    pub upper: f64,
    /// First node added beyond the anchor, if any.
    pub first_added: Option<NodeId>,
    pub gain_evaluations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// Selected protectors in selection order.
    pub chosen: Vec<NodeId>,
    pub objective: f64,
    /// `None` when no stored walk reaches the rumor set.
    pub blocking_percentage: Option<f64>,
    pub wall_time: Duration,
    pub expansions: usize,
    pub bound_calls: usize,
    pub gain_evaluations: u64,
    /// The search stopped at a cap and returned its incumbent.
    pub truncated: bool,
}

impl SolveReport {
    pub(crate) fn new(store: &SampleStore, table: &BlockTable, chosen: Vec<NodeId>, wall_time: Duration) -> Self {
        let objective = evaluate(store, table, &chosen);
        let influenced = store.influenced_mass();
        Self {
            chosen,
            objective,
            blocking_percentage: (influenced > 0.0).then(|| objective / influenced),
            wall_time,
            expansions: 0,
            bound_calls: 0,
            gain_evaluations: 0,
            truncated: false,
        }
    }

    pub fn sorted_set(&self) -> Vec<NodeId> {
        let mut s = self.chosen.clone();
        s.sort_unstable();
        s
    }
}

pub(crate) fn evaluate(store: &SampleStore, table: &BlockTable, nodes: &[NodeId]) -> f64 {
    let mut mask = vec![false; store.node_count()];
    for &v in nodes {
        mask[v as usize] = true;
    }
    block::objective_from_counts(store, table, &block::walk_counts(store, &mask))
}

pub(crate) fn check_budget(store: &SampleStore, k: usize) -> Result<()> {
    let available = store.node_count() - store.rumor().len();
    if k == 0 || k > available {
        return Err(Error::InvalidParameter(format!(
            "budget must lie in 1..={available}, got {k}"
        )));
    }
    Ok(())
}

/// `a` beats `b`: larger gain, then smaller id.
#[inline]
fn better(a: (f64, NodeId), b: (f64, NodeId)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Mutable per-run state: impression counts of every stored walk under
/// the current selection, plus the envelope anchors when bounding.
pub(crate) struct Scratch<'a> {
    store: &'a SampleStore,
    table: &'a BlockTable,
    counts: Vec<u32>,
    anchors: Vec<u32>,
    selected: Vec<bool>,
    pub chosen: Vec<NodeId>,
    pub gain_evaluations: u64,
}

impl<'a> Scratch<'a> {
    pub fn new(store: &'a SampleStore, table: &'a BlockTable) -> Self {
        Self {
            store,
            table,
            counts: vec![0; store.walk_count()],
            anchors: Vec::new(),
            selected: vec![false; store.node_count()],
            chosen: Vec::new(),
            gain_evaluations: 0,
        }
    }

    /// Starts from `anchor` and freezes its per-walk counts as envelope anchors.
    pub fn anchored(store: &'a SampleStore, table: &'a BlockTable, anchor: &[NodeId]) -> Self {
        let mut s = Self::new(store, table);
        for &v in anchor {
            s.add(v);
        }
        s.anchors = s.counts.clone();
        s
    }

    pub fn is_selected(&self, v: NodeId) -> bool {
        self.selected[v as usize]
    }

    pub fn len(&self) -> usize {
        self.chosen.len()
    }

    pub fn add(&mut self, v: NodeId) {
        debug_assert!(!self.selected[v as usize]);
        self.selected[v as usize] = true;
        self.chosen.push(v);
        for &w in self.store.walks_containing(v) {
            self.counts[w as usize] += 1;
        }
    }

    #[inline]
    fn block_gain(&self, v: NodeId) -> f64 {
        self.store
            .walks_containing(v)
            .iter()
            .map(|&w| {
                let c = self.counts[w as usize];
                self.store.walk_weight(w as usize) * (self.table.block(c + 1) - self.table.block(c))
            })
            .sum()
    }

    #[inline]
    fn envelope_gain(&self, v: NodeId) -> f64 {
        self.store
            .walks_containing(v)
            .iter()
            .map(|&w| {
                let (a, c) = (self.anchors[w as usize], self.counts[w as usize]);
                self.store.walk_weight(w as usize) * (self.table.envelope(a, c + 1) - self.table.envelope(a, c))
            })
            .sum()
    }

    pub fn gain(&mut self, v: NodeId, envelope: bool) -> f64 {
        self.gain_evaluations += 1;
        if envelope {
            self.envelope_gain(v)
        } else {
            self.block_gain(v)
        }
    }

    /// Marginal gains of `nodes`, computed in parallel.
    pub fn gains(&mut self, nodes: &[NodeId], envelope: bool) -> Vec<f64> {
        self.gain_evaluations += nodes.len() as u64;
        let this = &*self;
        nodes
            .par_iter()
            .with_min_len(256)
            .map(|&v| {
                if envelope {
                    this.envelope_gain(v)
                } else {
                    this.block_gain(v)
                }
            })
            .collect()
    }

    /// Best unselected candidate by marginal gain, ties toward smaller ids.
    pub fn argmax(&mut self, candidates: &[NodeId], envelope: bool) -> Option<(NodeId, f64)> {
        let this = &*self;
        let best = candidates
            .par_iter()
            .with_min_len(256)
            .filter(|&&v| !this.selected[v as usize])
            .map(|&v| {
                let g = if envelope {
                    this.envelope_gain(v)
                } else {
                    this.block_gain(v)
                };
                (g, v)
            })
            .reduce_with(|a, b| if better(b, a) { b } else { a });
        self.gain_evaluations += candidates.iter().filter(|&&v| !self.selected[v as usize]).count() as u64;
        best.map(|(g, v)| (v, g))
    }

    pub fn objective(&self) -> f64 {
        block::objective_from_counts(self.store, self.table, &self.counts)
    }

    pub fn envelope_objective(&self) -> f64 {
        block::envelope_from_counts(self.store, self.table, &self.anchors, &self.counts)
    }
}
