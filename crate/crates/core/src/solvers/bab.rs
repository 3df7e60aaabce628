//! Best-first branch and bound over protector sets.
//!
//! An entry is a partial set `P'` plus the candidates `V'` still allowed to
//! join it. Its bound comes from an envelope estimator run on `(P', V')`.
//! Entries pop in order of decreasing bound; each pop branches on the first
//! node its estimator added, into an include and an exclude child. The
//! incumbent starts as the better of the root completion and plain greedy.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::bound::{check_rho, pro_sam_compute_bound_within, sam_compute_bound_within};
use super::heuristics::greedy_with_table;
use super::{check_budget, evaluate, BoundResult, SolveReport, SolverLimits};
use crate::block::{BlockTable, LogisticParams};
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::walk::SampleStore;

const PRUNE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundEstimator {
    /// Full greedy rescans each round.
    Greedy,
    /// Descending-threshold selection with step `1 + rho`.
    Progressive { rho: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BabOptions {
    pub estimator: BoundEstimator,
    pub limits: SolverLimits,
    /// When set, every bound is divided by the estimator's worst-case
    /// approximation factor (`1 - 1/e - epsilon`, minus `rho` for the
    /// progressive estimator) so that it bounds the branch optimum.
    pub certified_epsilon: Option<f64>,
}

impl BabOptions {
    pub fn new(estimator: BoundEstimator, budget: usize) -> Self {
        Self {
            estimator,
            limits: SolverLimits::new(budget),
            certified_epsilon: None,
        }
    }

    fn bound_scale(&self) -> Result<f64> {
        let Some(epsilon) = self.certified_epsilon else {
            return Ok(1.0);
        };
        let mut factor = 1.0 - (-1.0f64).exp() - epsilon;
        if let BoundEstimator::Progressive { rho } = self.estimator {
            factor -= rho;
        }
        if !(epsilon >= 0.0 && factor > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "certified bounds need a positive approximation factor, got {factor}"
            )));
        }
        Ok(1.0 / factor)
    }
}

struct Entry {
    upper: f64,
    seq: u64,
    partial: Vec<NodeId>,
    candidates: Vec<NodeId>,
    branch: NodeId,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // Max-heap on the bound; among equal bounds the older entry first.
    fn cmp(&self, other: &Self) -> Ordering {
        self.upper
            .total_cmp(&other.upper)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Search<'a> {
    store: &'a SampleStore,
    table: &'a BlockTable,
    options: BabOptions,
    scale: f64,
    best: Vec<NodeId>,
    best_value: f64,
    heap: BinaryHeap<Entry>,
    seq: u64,
    bound_calls: usize,
    gain_evaluations: u64,
}

impl Search<'_> {
    fn bound(&mut self, partial: &[NodeId], candidates: &[NodeId]) -> BoundResult {
        let k = self.options.limits.budget;
        let result = match self.options.estimator {
            BoundEstimator::Greedy => sam_compute_bound_within(self.store, self.table, partial, candidates, k),
            BoundEstimator::Progressive { rho } => {
                pro_sam_compute_bound_within(self.store, self.table, partial, candidates, k, rho)
            }
        };
        self.bound_calls += 1;
        self.gain_evaluations += result.gain_evaluations;
        result
    }

    /// Bounds `(partial, candidates)`, updates the incumbent and queues the
    /// entry if it may still beat it.
    fn visit(&mut self, partial: Vec<NodeId>, candidates: Vec<NodeId>) {
        let k = self.options.limits.budget;
        if partial.len() + candidates.len() < k {
            return;
        }
        let result = self.bound(&partial, &candidates);
        if result.protectors.len() == k && result.lower > self.best_value {
            self.best_value = result.lower;
            self.best = result.protectors.clone();
        }
        let upper = result.upper * self.scale;
        // With no room left to choose, the completion is the only member.
        let has_choice = partial.len() < k && partial.len() + candidates.len() > k;
        if let (true, Some(branch)) = (has_choice, result.first_added) {
            if upper > self.best_value + PRUNE_SLACK {
                self.seq += 1;
                self.heap.push(Entry {
                    upper,
                    seq: self.seq,
                    partial,
                    candidates,
                    branch,
                });
            }
        }
    }
}

/// Branch and bound with the chosen envelope estimator. Caps in
/// `options.limits` stop the search early with `truncated` set.
pub fn branch_and_bound(store: &SampleStore, params: &LogisticParams, options: BabOptions) -> Result<SolveReport> {
    let k = options.limits.budget;
    check_budget(store, k)?;
    if let BoundEstimator::Progressive { rho } = options.estimator {
        check_rho(rho)?;
    }
    let scale = options.bound_scale()?;
    let started = Instant::now();
    let table = BlockTable::for_store(*params, store)?;

    let (greedy, greedy_evaluations) = greedy_with_table(store, &table, k);
    let mut search = Search {
        store,
        table: &table,
        options,
        scale,
        best_value: evaluate(store, &table, &greedy),
        best: greedy,
        heap: BinaryHeap::new(),
        seq: 0,
        bound_calls: 0,
        gain_evaluations: greedy_evaluations,
    };
    search.visit(Vec::new(), store.candidates());

    let mut expansions = 0;
    let mut truncated = false;
    while let Some(entry) = search.heap.pop() {
        if entry.upper <= search.best_value + PRUNE_SLACK {
            break;
        }
        let out_of_nodes = options.limits.node_expansion_cap.is_some_and(|cap| expansions >= cap);
        let out_of_time = options.limits.wall_time_cap.is_some_and(|cap| started.elapsed() >= cap);
        if out_of_nodes || out_of_time {
            truncated = true;
            break;
        }
        expansions += 1;

        let Entry {
            partial,
            mut candidates,
            branch,
            ..
        } = entry;
        candidates.retain(|&v| v != branch);
        let mut included = partial.clone();
        included.push(branch);
        search.visit(included, candidates.clone());
        search.visit(partial, candidates);
    }

    let mut report = SolveReport::new(store, &table, search.best, started.elapsed());
    report.expansions = expansions;
    report.bound_calls = search.bound_calls;
    report.gain_evaluations = search.gain_evaluations;
    report.truncated = truncated;
    Ok(report)
}
