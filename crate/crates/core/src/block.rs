//! Impression counting, the logistic block value and its concave envelope.
//!
//! For one walk, the impression count `C` is the number of protectors in the
//! walk's pre-rumor prefix. The block value is `0` for `C = 0` and
//! `1 / (1 + exp(alpha - beta * C))` otherwise. That S-curve is not concave,
//! so the objective summed over walks is not submodular. The envelope
//! replaces, per walk, the curve above an anchor count `c0` by the line from
//! `(c0, I(c0))` tangent to the curve, followed by the curve itself past the
//! tangency point. Summed over walks it is submodular in the protector set
//! and dominates the true objective on supersets of the anchor set.

use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::walk::{SampleStore, WalkProfile};

/// Slope and offset of the logistic block curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticParams {
    alpha: f64,
    beta: f64,
}

impl LogisticParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite() && beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "logistic parameters must be positive and finite, got alpha={alpha} beta={beta}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Count at which the curve switches from convex to concave.
    pub fn inflection(&self) -> f64 {
        self.alpha / self.beta
    }

    /// The smooth logistic `1 / (1 + exp(alpha - beta * c))`, without the
    /// jump to zero at `c = 0`.
    #[inline]
    pub fn curve(&self, c: f64) -> f64 {
        1.0 / (1.0 + (self.alpha - self.beta * c).exp())
    }

    #[inline]
    pub fn slope(&self, c: f64) -> f64 {
        let f = self.curve(c);
        self.beta * f * (1.0 - f)
    }

    /// Block value of a walk with `count` impressions.
    #[inline]
    pub fn block(&self, count: usize) -> f64 {
        if count == 0 {
            0.0
        } else {
            self.curve(count as f64)
        }
    }
}

/// Block value of a walk with `count` impressions.
pub fn logistic_block(params: &LogisticParams, count: usize) -> f64 {
    params.block(count)
}

/// Number of protectors in the walk's prefix, or zero when the walk never
/// reaches the rumor set. `protectors` must be sorted.
pub fn impression_count(profile: &WalkProfile, protectors: &[NodeId]) -> usize {
    if !profile.hit {
        return 0;
    }
    profile
        .prefix
        .iter()
        .filter(|v| protectors.binary_search(v).is_ok())
        .count()
}

const TANGENT_TOLERANCE: f64 = 1e-9;
const TANGENT_MAX_ITERATIONS: usize = 200;

/// Per-walk envelope, fixed by the impression count `c0` of the anchor set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeAnchor {
    pub c0: f64,
    pub y0: f64,
    /// x-coordinate of the tangency point; equals `c0` when the curve is
    /// already concave from the anchor on.
    pub tangent_c: f64,
    pub tangent_slope: f64,
    /// Only for a zero anchor when the chord to `(1, I(1))` is steeper than
    /// any line from the origin tangent to the curve (always when
    /// `alpha < 2`): the envelope runs through `(1, I(1))` first and the
    /// tangent segment starts there.
    pub knee: Option<(f64, f64)>,
}

impl EnvelopeAnchor {
    /// Anchor at `c0` with the block-value convention `y0 = I(c0)`.
    pub fn at(params: &LogisticParams, c0: f64) -> Result<Self> {
        let y0 = if c0 == 0.0 { 0.0 } else { params.curve(c0) };
        tangent_point(params, c0, y0)
    }
}

/// Builds the envelope anchored at `(c0, y0)` where `y0` is `0` for
/// `c0 = 0` and the logistic at `c0` otherwise.
pub fn tangent_point(params: &LogisticParams, c0: f64, y0: f64) -> Result<EnvelopeAnchor> {
    if !(c0 >= 0.0 && c0.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "anchor count must be non-negative, got {c0}"
        )));
    }
    let expected = if c0 == 0.0 { 0.0 } else { params.curve(c0) };
    if (y0 - expected).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "anchor value {y0} does not match the block value {expected} at {c0}"
        )));
    }
    let inflection = params.inflection();
    if c0 >= inflection {
        return Ok(EnvelopeAnchor {
            c0,
            y0,
            tangent_c: c0,
            tangent_slope: params.slope(c0),
            knee: None,
        });
    }

    let mut from = (c0, y0);
    let mut knee = None;
    if c0 == 0.0 {
        // Over counts >= 1 the hull from the origin follows the steeper of
        // the chord to (1, I(1)) and the line tangent to the curve.
        let one = (1.0, params.curve(1.0));
        let tangent_slope = if tangent_excess(params, from, inflection) >= 0.0 {
            let t = solve_tangent(params, from)?;
            params.curve(t) / t
        } else {
            f64::NEG_INFINITY
        };
        if one.1 > tangent_slope {
            knee = Some(one);
            from = one;
            if 1.0 >= inflection {
                return Ok(EnvelopeAnchor {
                    c0,
                    y0,
                    tangent_c: 1.0,
                    tangent_slope: params.slope(1.0),
                    knee,
                });
            }
        }
    }

    let tangent_c = solve_tangent(params, from)?;
    Ok(EnvelopeAnchor {
        c0,
        y0,
        tangent_c,
        tangent_slope: params.slope(tangent_c),
        knee,
    })
}

/// `f'(t) (t - x) - (f(t) - y)`: positive while the tangent at `t` passes
/// above `(x, y)`.
fn tangent_excess(params: &LogisticParams, (x, y): (f64, f64), t: f64) -> f64 {
    params.slope(t) * (t - x) - (params.curve(t) - y)
}

fn solve_tangent(params: &LogisticParams, from: (f64, f64)) -> Result<f64> {
    let mut lo = from.0.max(params.inflection());
    let mut hi = params.inflection() + 60.0 / params.beta();
    if tangent_excess(params, from, lo) < 0.0 || tangent_excess(params, from, hi) > 0.0 {
        return Err(Error::Numerical(format!(
            "no tangency point bracketed in [{lo}, {hi}] from {from:?}"
        )));
    }
    for _ in 0..TANGENT_MAX_ITERATIONS {
        if hi - lo <= TANGENT_TOLERANCE {
            return Ok(0.5 * (lo + hi));
        }
        let mid = 0.5 * (lo + hi);
        if tangent_excess(params, from, mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Numerical("tangent bisection did not converge".into()))
}

/// Envelope value at impression count `c >= anchor.c0`.
pub fn envelope_value(anchor: &EnvelopeAnchor, params: &LogisticParams, c: f64) -> Result<f64> {
    if c < anchor.c0 - 1e-12 || c.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "envelope evaluated at {c} below its anchor {}",
            anchor.c0
        )));
    }
    if c <= anchor.c0 {
        return Ok(anchor.y0);
    }
    if c >= anchor.tangent_c {
        return Ok(params.curve(c));
    }
    Ok(match anchor.knee {
        Some((kx, ky)) if c <= kx => anchor.y0 + (ky - anchor.y0) * (c - anchor.c0) / (kx - anchor.c0),
        Some((kx, ky)) => ky + anchor.tangent_slope * (c - kx),
        None => anchor.y0 + anchor.tangent_slope * (c - anchor.c0),
    })
}

/// Block and envelope values tabulated over integer counts `0..=max_count`.
#[derive(Debug, Clone)]
pub struct BlockTable {
    params: LogisticParams,
    width: usize,
    block: Vec<f64>,
    envelope: Vec<f64>,
}

impl BlockTable {
    pub fn new(params: LogisticParams, max_count: usize) -> Result<Self> {
        let width = max_count + 1;
        let block: Vec<f64> = (0..width).map(|c| params.block(c)).collect();
        let mut envelope = vec![f64::NAN; width * width];
        for a in 0..width {
            let anchor = EnvelopeAnchor::at(&params, a as f64)?;
            for c in a..width {
                envelope[a * width + c] = envelope_value(&anchor, &params, c as f64)?;
            }
        }
        Ok(Self {
            params,
            width,
            block,
            envelope,
        })
    }

    pub fn for_store(params: LogisticParams, store: &SampleStore) -> Result<Self> {
        Self::new(params, store.max_prefix_len())
    }

    pub fn params(&self) -> &LogisticParams {
        &self.params
    }

    #[inline]
    pub fn block(&self, count: u32) -> f64 {
        self.block[count as usize]
    }

    /// Envelope value at `count` for a walk anchored at `anchor`.
    #[inline]
    pub fn envelope(&self, anchor: u32, count: u32) -> f64 {
        self.envelope[anchor as usize * self.width + count as usize]
    }
}

/// Checks a protector set against the store and returns it as a mask.
pub(crate) fn protector_mask(store: &SampleStore, protectors: &[NodeId]) -> Result<Vec<bool>> {
    let n = store.node_count();
    let mut mask = vec![false; n];
    for &p in protectors {
        if p as usize >= n {
            return Err(Error::NodeOutOfRange { node: p, node_count: n });
        }
        if store.rumor().contains(p) {
            return Err(Error::InvalidProtectorSet(format!("node {p} is a rumor node")));
        }
        mask[p as usize] = true;
    }
    Ok(mask)
}

/// Impression count of every stored walk under the protectors in `mask`.
pub(crate) fn walk_counts(store: &SampleStore, mask: &[bool]) -> Vec<u32> {
    let mut counts = vec![0u32; store.walk_count()];
    for (v, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
        for &w in store.walks_containing(v as NodeId) {
            counts[w as usize] += 1;
        }
    }
    counts
}

pub(crate) fn objective_from_counts(store: &SampleStore, table: &BlockTable, counts: &[u32]) -> f64 {
    counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(w, &c)| store.walk_weight(w) * table.block(c))
        .sum()
}

pub(crate) fn envelope_from_counts(store: &SampleStore, table: &BlockTable, anchors: &[u32], counts: &[u32]) -> f64 {
    counts
        .iter()
        .zip(anchors)
        .enumerate()
        .filter(|(_, (&c, _))| c > 0)
        .map(|(w, (&c, &a))| store.walk_weight(w) * table.envelope(a, c))
        .sum()
}

/// Estimated influence block `B(P | R)`: the weighted sum of per-walk block
/// values, i.e. the per-user average over walks summed over `V \ R`.
pub fn estimate_objective(store: &SampleStore, params: &LogisticParams, protectors: &[NodeId]) -> Result<f64> {
    let mask = protector_mask(store, protectors)?;
    let table = BlockTable::for_store(*params, store)?;
    Ok(objective_from_counts(store, &table, &walk_counts(store, &mask)))
}

/// Envelope objective anchored at `anchor_set`, evaluated at `protectors`.
pub fn estimate_envelope_objective(
    store: &SampleStore,
    params: &LogisticParams,
    anchor_set: &[NodeId],
    protectors: &[NodeId],
) -> Result<f64> {
    let anchor_mask = protector_mask(store, anchor_set)?;
    let mask = protector_mask(store, protectors)?;
    if anchor_mask.iter().zip(&mask).any(|(&a, &p)| a && !p) {
        return Err(Error::InvalidProtectorSet(
            "envelope is only defined on supersets of its anchor set".into(),
        ));
    }
    let table = BlockTable::for_store(*params, store)?;
    let anchors = walk_counts(store, &anchor_mask);
    let counts = walk_counts(store, &mask);
    Ok(envelope_from_counts(store, &table, &anchors, &counts))
}

/// Number of stored hit walks whose prefix contains each node.
pub fn block_degree(store: &SampleStore) -> Vec<u32> {
    (0..store.node_count() as NodeId)
        .map(|v| store.walks_containing(v).len() as u32)
        .collect()
}

/// Weighted block degree: total weight of the hit walks containing each
/// node. Orders nodes exactly as [`block_degree`] on a sampled store.
pub fn block_mass(store: &SampleStore) -> Vec<f64> {
    (0..store.node_count() as NodeId)
        .map(|v| {
            store
                .walks_containing(v)
                .iter()
                .map(|&w| store.walk_weight(w as usize))
                .sum()
        })
        .collect()
}

/// Share of the users reached by the rumor that the protectors block:
/// `B(P | R)` over the estimated number of users whose walk hits `R`.
pub fn blocking_percentage(store: &SampleStore, params: &LogisticParams, protectors: &[NodeId]) -> Result<f64> {
    let influenced = store.influenced_mass();
    if influenced <= 0.0 {
        return Err(Error::RumorUnreachable);
    }
    Ok(estimate_objective(store, params, protectors)? / influenced)
}
