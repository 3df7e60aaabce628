//! Envelope bound estimators.
//!
//! Both complete an anchor set to `k` nodes by (approximately) maximizing
//! the envelope objective anchored there, and report the completed set's
//! true objective as a lower bound and its envelope value as the bound.

use super::{BoundResult, Scratch};
use crate::block::{BlockTable, LogisticParams};
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::walk::SampleStore;

fn check_anchor(store: &SampleStore, anchor: &[NodeId], k: usize) -> Result<()> {
    crate::block::protector_mask(store, anchor)?;
    if anchor.len() > k {
        return Err(Error::InvalidParameter(format!(
            "anchor set of size {} exceeds the budget {k}",
            anchor.len()
        )));
    }
    Ok(())
}

fn finish(scratch: Scratch<'_>, anchor_len: usize) -> BoundResult {
    BoundResult {
        lower: scratch.objective(),
        upper: scratch.envelope_objective(),
        first_added: scratch.chosen.get(anchor_len).copied(),
        gain_evaluations: scratch.gain_evaluations,
        protectors: scratch.chosen,
    }
}

/// Greedy envelope completion of `anchor` over all of `V \ R`.
pub fn sam_compute_bound(
    store: &SampleStore,
    params: &LogisticParams,
    anchor: &[NodeId],
    k: usize,
) -> Result<BoundResult> {
    check_anchor(store, anchor, k)?;
    let table = BlockTable::for_store(*params, store)?;
    Ok(sam_compute_bound_within(store, &table, anchor, &store.candidates(), k))
}

/// Greedy envelope completion of `anchor` drawing only from `candidates`.
/// Every round rescans all remaining candidates.
pub fn sam_compute_bound_within(
    store: &SampleStore,
    table: &BlockTable,
    anchor: &[NodeId],
    candidates: &[NodeId],
    k: usize,
) -> BoundResult {
    let mut scratch = Scratch::anchored(store, table, anchor);
    while scratch.len() < k {
        match scratch.argmax(candidates, true) {
            Some((v, _)) => scratch.add(v),
            None => break,
        }
    }
    finish(scratch, anchor.len())
}

/// Threshold-descending envelope completion of `anchor` over `V \ R`.
pub fn pro_sam_compute_bound(
    store: &SampleStore,
    params: &LogisticParams,
    anchor: &[NodeId],
    k: usize,
    rho: f64,
) -> Result<BoundResult> {
    check_anchor(store, anchor, k)?;
    check_rho(rho)?;
    let table = BlockTable::for_store(*params, store)?;
    Ok(pro_sam_compute_bound_within(
        store,
        &table,
        anchor,
        &store.candidates(),
        k,
        rho,
    ))
}

pub(crate) fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter(format!("rho must be positive, got {rho}")));
    }
    Ok(())
}

/// Candidates are sorted once by their gain against the anchor. The
/// threshold starts at the largest gain; each sweep adds every node whose
/// current gain reaches it, and stops at the first node whose initial gain
/// is below it (envelope gains only shrink as the set grows). The threshold
/// then drops by a factor `1 + rho`. Once it underflows, any remaining
/// slots are filled greedily.
pub fn pro_sam_compute_bound_within(
    store: &SampleStore,
    table: &BlockTable,
    anchor: &[NodeId],
    candidates: &[NodeId],
    k: usize,
    rho: f64,
) -> BoundResult {
    let mut scratch = Scratch::anchored(store, table, anchor);
    let pending: Vec<NodeId> = candidates
        .iter()
        .copied()
        .filter(|&v| !scratch.is_selected(v))
        .collect();
    let mut order: Vec<(f64, NodeId)> = scratch.gains(&pending, true).into_iter().zip(pending).collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let Some(&(top, _)) = order.first() else {
        return finish(scratch, anchor.len());
    };
    let floor = f64::max(1e-12, top * 1e-9);
    let mut threshold = top;
    while scratch.len() < k && threshold >= floor {
        for &(initial, v) in &order {
            if initial < threshold {
                break;
            }
            if scratch.is_selected(v) {
                continue;
            }
            if scratch.gain(v, true) >= threshold {
                scratch.add(v);
                if scratch.len() == k {
                    break;
                }
            }
        }
        threshold /= 1.0 + rho;
    }
    while scratch.len() < k {
        match scratch.argmax(candidates, true) {
            Some((v, _)) => scratch.add(v),
            None => break,
        }
    }
    finish(scratch, anchor.len())
}
