//! Seeded Chung–Lu graphs with power-law expected degrees, used as
//! stand-ins when a benchmark dataset is not on disk.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// Shape of a synthetic graph. The expected degree sequence decays as a
/// power law from `max_degree` and averages `avg_degree`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub nodes: usize,
    pub avg_degree: f64,
    pub max_degree: f64,
    /// Degree-distribution exponent, > 2.
    pub exponent: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    /// Roughly the size and degree profile of the Gnutella peer-to-peer
    /// snapshot used in the effectiveness experiments.
    pub fn gnutella_like(seed: u64) -> Self {
        Self {
            nodes: 8846,
            avg_degree: 7.2,
            max_degree: 88.0,
            exponent: 2.5,
            seed,
        }
    }
}

/// Expected degrees `w_i = max * (i0 / (i + i0))^(1/(exponent-1))`, with
/// `i0` chosen by bisection so that the mean is `avg_degree`.
pub fn power_law_weights(spec: &SyntheticSpec) -> Result<Vec<f64>> {
    let SyntheticSpec {
        nodes,
        avg_degree,
        max_degree,
        exponent,
        ..
    } = *spec;
    if nodes < 2 || !(avg_degree > 0.0 && avg_degree < max_degree && max_degree < nodes as f64 && exponent > 2.0) {
        return Err(Error::InvalidParameter(format!(
            "unusable synthetic graph shape {spec:?}"
        )));
    }
    let theta = 1.0 / (exponent - 1.0);
    let weights = |i0: f64| -> Vec<f64> {
        (0..nodes)
            .map(|i| max_degree * (i0 / (i as f64 + i0)).powf(theta))
            .collect()
    };
    let mean = |i0: f64| weights(i0).iter().sum::<f64>() / nodes as f64;
    let (mut lo, mut hi) = (1e-6, nodes as f64 * 1e3);
    if mean(lo) > avg_degree || mean(hi) < avg_degree {
        return Err(Error::InvalidParameter(format!(
            "cannot reach average degree {avg_degree}"
        )));
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if mean(mid) < avg_degree {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(weights(hi))
}

/// Undirected Chung–Lu graph: edge `{u, v}` appears independently with
/// probability `min(1, w_u w_v / sum w)`. Uses geometric skipping over the
/// descending weight order, so the cost is linear in nodes plus edges.
pub fn chung_lu(weights: &[f64], seed: u64) -> Result<Graph> {
    if weights.windows(2).any(|p| p[0] < p[1]) || weights.iter().any(|w| w.is_nan() || *w < 0.0) {
        return Err(Error::InvalidParameter(
            "weights must be non-negative and descending".into(),
        ));
    }
    let n = weights.len();
    let total: f64 = weights.iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n.saturating_sub(1) {
        let mut v = u + 1;
        let mut p = (weights[u] * weights[v] / total).min(1.0);
        while v < n && p > 0.0 {
            if p < 1.0 {
                let r: f64 = rng.random();
                v += ((1.0 - r).ln() / (1.0 - p).ln()).floor() as usize;
            }
            if v < n {
                let q = (weights[u] * weights[v] / total).min(1.0);
                if rng.random::<f64>() < q / p {
                    edges.push((u as NodeId, v as NodeId));
                }
                p = q;
                v += 1;
            }
        }
    }
    Graph::from_edges(n, edges, false)
}

pub fn generate(spec: &SyntheticSpec) -> Result<Graph> {
    chung_lu(&power_law_weights(spec)?, spec.seed)
}
