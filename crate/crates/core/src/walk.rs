//! Bounded random walks and the shared sample store.
//!
//! A walk starts at a non-rumor node and moves to a uniformly random
//! neighbor of the current node at each step. It stops at the first rumor
//! node (a hit), at a dead end, or after `walk_length` steps. Only the
//! distinct non-rumor nodes seen before the stop matter to the objective,
//! so that prefix is all a profile keeps.
//!
//! The store keeps the prefixes of hit walks only: walks that never reach
//! the rumor set contribute nothing to any objective, and dropping them
//! keeps dataset-scale stores small. Miss walks survive as per-node counts.

use std::io::{Read, Write};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// Sampling parameters: walk length threshold `T`, walks per start node `X`
/// and the master RNG seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub walk_length: usize,
    pub walks_per_node: usize,
    pub seed: u64,
}

impl SampleConfig {
    pub fn new(walk_length: usize, walks_per_node: usize, seed: u64) -> Result<Self> {
        if walk_length == 0 {
            return Err(Error::InvalidParameter("walk length must be at least 1".into()));
        }
        if walks_per_node == 0 {
            return Err(Error::InvalidParameter("walks per node must be at least 1".into()));
        }
        Ok(Self {
            walk_length,
            walks_per_node,
            seed,
        })
    }
}

/// Sorted rumor node list plus a membership mask over the graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RumorSet {
    members: Vec<NodeId>,
    mask: Vec<bool>,
}

impl RumorSet {
    pub fn new(node_count: usize, nodes: &[NodeId]) -> Result<Self> {
        let mut members = nodes.to_vec();
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            return Err(Error::InvalidRumorSet("rumor set is empty".into()));
        }
        if let Some(&bad) = members.iter().find(|&&r| r as usize >= node_count) {
            return Err(Error::NodeOutOfRange { node: bad, node_count });
        }
        if members.len() == node_count {
            return Err(Error::InvalidRumorSet("rumor set covers every node".into()));
        }
        let mut mask = vec![false; node_count];
        for &r in &members {
            mask[r as usize] = true;
        }
        Ok(Self { members, mask })
    }

    #[inline]
    pub fn contains(&self, v: NodeId) -> bool {
        self.mask[v as usize]
    }

    pub fn members(&self) -> &[NodeId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.mask.len()
    }

    /// Nodes outside the rumor set in ascending order.
    pub fn complement(&self) -> Vec<NodeId> {
        (0..self.mask.len() as NodeId)
            .filter(|&v| !self.mask[v as usize])
            .collect()
    }
}

/// Outcome of one walk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkProfile {
    pub start: NodeId,
    /// The walk reached the rumor set within the length threshold.
    pub hit: bool,
    /// Distinct non-rumor nodes visited before the first rumor node, sorted.
    pub prefix: Vec<NodeId>,
}

/// Runs one walk of at most `walk_length` steps from `start`.
pub fn sample_walk<R: Rng + ?Sized>(
    graph: &Graph,
    start: NodeId,
    rumor: &RumorSet,
    walk_length: usize,
    rng: &mut R,
) -> WalkProfile {
    debug_assert!(!rumor.contains(start));
    let mut prefix = vec![start];
    let mut hit = false;
    let mut current = start;
    for _ in 0..walk_length {
        let next = graph.adj(current);
        if next.is_empty() {
            break;
        }
        current = next[rng.random_range(0..next.len())];
        if rumor.contains(current) {
            hit = true;
            break;
        }
        prefix.push(current);
    }
    prefix.sort_unstable();
    prefix.dedup();
    WalkProfile { start, hit, prefix }
}

/// How a store's walk weights were produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StoreOrigin {
    /// Monte Carlo: every walk weighs `1 / walks_per_node`.
    Sampled(SampleConfig),
    /// Every distinct walk realization weighted by its exact probability.
    Exact { walk_length: usize },
}

impl StoreOrigin {
    pub fn walk_length(&self) -> usize {
        match self {
            StoreOrigin::Sampled(cfg) => cfg.walk_length,
            StoreOrigin::Exact { walk_length } => *walk_length,
        }
    }
}

/// A hit walk handed to [`SampleStore::from_weighted_profiles`].
#[derive(Debug, Clone)]
pub struct WeightedProfile {
    pub start: NodeId,
    pub weight: f64,
    pub prefix: Vec<NodeId>,
}

/// Materialized hit walks with a node -> walks inverted index.
///
/// Hit walks are identified by a dense `u32` index, ordered by start node.
#[derive(Debug, Clone)]
pub struct SampleStore {
    origin: StoreOrigin,
    rumor: RumorSet,
    walk_start: Vec<NodeId>,
    walk_weight: Vec<f64>,
    prefix_offsets: Vec<usize>,
    prefix_nodes: Vec<NodeId>,
    index_offsets: Vec<usize>,
    index_walks: Vec<u32>,
    hit_counts: Vec<u32>,
    hit_mass: Vec<f64>,
    max_prefix: usize,
}

impl SampleStore {
    /// Assembles a store from hit walks sorted by start node. `hit_counts`
    /// and `hit_mass` are per node: number of hit walks and their total
    /// weight (the estimated probability that the node's walk is hit).
    pub fn from_weighted_profiles(
        origin: StoreOrigin,
        rumor: RumorSet,
        profiles: Vec<WeightedProfile>,
        hit_counts: Vec<u32>,
    ) -> Result<Self> {
        let n = rumor.node_count();
        if hit_counts.len() != n {
            return Err(Error::InvalidParameter("hit count table has the wrong length".into()));
        }
        let mut walk_start = Vec::with_capacity(profiles.len());
        let mut walk_weight = Vec::with_capacity(profiles.len());
        let mut prefix_offsets = Vec::with_capacity(profiles.len() + 1);
        let mut prefix_nodes = Vec::new();
        let mut degree = vec![0usize; n];
        let mut hit_mass = vec![0.0; n];
        let mut max_prefix = 0;
        prefix_offsets.push(0);
        let mut last_start = 0;
        for p in profiles {
            if p.start < last_start {
                return Err(Error::InvalidParameter("profiles must be sorted by start".into()));
            }
            last_start = p.start;
            for &v in &p.prefix {
                if v as usize >= n {
                    return Err(Error::NodeOutOfRange { node: v, node_count: n });
                }
                if rumor.contains(v) {
                    return Err(Error::InvalidParameter(format!("prefix contains rumor node {v}")));
                }
                degree[v as usize] += 1;
            }
            hit_mass[p.start as usize] += p.weight;
            max_prefix = max_prefix.max(p.prefix.len());
            walk_start.push(p.start);
            walk_weight.push(p.weight);
            prefix_nodes.extend_from_slice(&p.prefix);
            prefix_offsets.push(prefix_nodes.len());
        }
        if walk_start.len() > u32::MAX as usize {
            return Err(Error::InvalidParameter("too many hit walks".into()));
        }

        let mut index_offsets = Vec::with_capacity(n + 1);
        index_offsets.push(0);
        for d in &degree {
            index_offsets.push(index_offsets.last().unwrap() + d);
        }
        let mut cursor = index_offsets.clone();
        let mut index_walks = vec![0u32; prefix_nodes.len()];
        for w in 0..walk_start.len() {
            for &v in &prefix_nodes[prefix_offsets[w]..prefix_offsets[w + 1]] {
                index_walks[cursor[v as usize]] = w as u32;
                cursor[v as usize] += 1;
            }
        }

        Ok(Self {
            origin,
            rumor,
            walk_start,
            walk_weight,
            prefix_offsets,
            prefix_nodes,
            index_offsets,
            index_walks,
            hit_counts,
            hit_mass,
            max_prefix,
        })
    }

    pub fn origin(&self) -> StoreOrigin {
        self.origin
    }

    pub fn walk_length(&self) -> usize {
        self.origin.walk_length()
    }

    pub fn rumor(&self) -> &RumorSet {
        &self.rumor
    }

    pub fn node_count(&self) -> usize {
        self.rumor.node_count()
    }

    /// Candidate protectors, `V \ R`, ascending.
    pub fn candidates(&self) -> Vec<NodeId> {
        self.rumor.complement()
    }

    /// Number of stored (hit) walks.
    pub fn walk_count(&self) -> usize {
        self.walk_start.len()
    }

    #[inline]
    pub fn walk_prefix(&self, w: usize) -> &[NodeId] {
        &self.prefix_nodes[self.prefix_offsets[w]..self.prefix_offsets[w + 1]]
    }

    #[inline]
    pub fn walk_weight(&self, w: usize) -> f64 {
        self.walk_weight[w]
    }

    pub fn walk_start(&self, w: usize) -> NodeId {
        self.walk_start[w]
    }

    /// Hit walks whose prefix contains `v`.
    #[inline]
    pub fn walks_containing(&self, v: NodeId) -> &[u32] {
        let v = v as usize;
        &self.index_walks[self.index_offsets[v]..self.index_offsets[v + 1]]
    }

    /// Hit walks started at `u`.
    pub fn hit_count(&self, u: NodeId) -> u32 {
        self.hit_counts[u as usize]
    }

    /// Estimated probability that a walk from `u` reaches the rumor set.
    pub fn hit_mass(&self, u: NodeId) -> f64 {
        self.hit_mass[u as usize]
    }

    /// Estimated number of users whose walk reaches the rumor set.
    pub fn influenced_mass(&self) -> f64 {
        self.hit_mass.iter().sum()
    }

    /// Longest stored prefix; impression counts never exceed it.
    pub fn max_prefix_len(&self) -> usize {
        self.max_prefix
    }

    /// Total inverted-index size, i.e. the work of one full gain scan.
    pub fn index_len(&self) -> usize {
        self.index_walks.len()
    }

    /// Serializes a sampled store as version-tagged JSON.
    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        let StoreOrigin::Sampled(config) = self.origin else {
            return Err(Error::Format("only sampled stores can be dumped".into()));
        };
        let mut nodes = Vec::new();
        let mut w = 0;
        for u in self.candidates() {
            let mut hit_prefixes = Vec::new();
            while w < self.walk_count() && self.walk_start[w] == u {
                hit_prefixes.push(self.walk_prefix(w).to_vec());
                w += 1;
            }
            nodes.push(NodeDump {
                start: u,
                hit_count: self.hit_counts[u as usize],
                hit_prefixes,
            });
        }
        let dump = StoreDump {
            version: STORE_DUMP_VERSION,
            node_count: self.node_count(),
            walks_per_node: config.walks_per_node,
            walk_length: config.walk_length,
            seed: config.seed,
            rumor_set: self.rumor.members().to_vec(),
            nodes,
        };
        serde_json::to_writer(out, &dump)?;
        Ok(())
    }

    pub fn read_json<R: Read>(input: R) -> Result<Self> {
        let dump: StoreDump = serde_json::from_reader(input)?;
        if dump.version != STORE_DUMP_VERSION {
            return Err(Error::Format(format!("store dump version {}", dump.version)));
        }
        let config = SampleConfig::new(dump.walk_length, dump.walks_per_node, dump.seed)?;
        let rumor = RumorSet::new(dump.node_count, &dump.rumor_set)?;
        let weight = 1.0 / config.walks_per_node as f64;
        let mut hit_counts = vec![0; dump.node_count];
        let mut profiles = Vec::new();
        for node in dump.nodes {
            if node.start as usize >= dump.node_count || rumor.contains(node.start) {
                return Err(Error::Format(format!("bad start node {}", node.start)));
            }
            if node.hit_count as usize != node.hit_prefixes.len() {
                return Err(Error::Format(format!("hit count mismatch at {}", node.start)));
            }
            hit_counts[node.start as usize] = node.hit_count;
            profiles.extend(node.hit_prefixes.into_iter().map(|prefix| WeightedProfile {
                start: node.start,
                weight,
                prefix,
            }));
        }
        Self::from_weighted_profiles(StoreOrigin::Sampled(config), rumor, profiles, hit_counts)
    }
}

pub const STORE_DUMP_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct StoreDump {
    version: u32,
    node_count: usize,
    walks_per_node: usize,
    walk_length: usize,
    seed: u64,
    rumor_set: Vec<NodeId>,
    nodes: Vec<NodeDump>,
}

#[derive(Serialize, Deserialize)]
struct NodeDump {
    start: NodeId,
    hit_count: u32,
    hit_prefixes: Vec<Vec<NodeId>>,
}

/// Word offset between the substreams of consecutive walks of one node.
const WALK_STREAM_STRIDE: u32 = 24;

/// RNG for walk `index` from `start`. Every (start, index) pair gets its own
/// ChaCha stream position, so the store does not depend on scheduling.
fn walk_rng(base: &ChaCha8Rng, start: NodeId, index: usize) -> ChaCha8Rng {
    let mut rng = base.clone();
    rng.set_stream(start as u64);
    rng.set_word_pos((index as u128) << WALK_STREAM_STRIDE);
    rng
}

/// Samples `walks_per_node` walks from every non-rumor node.
pub fn build_sample_store(graph: &Graph, rumor: &[NodeId], config: SampleConfig) -> Result<SampleStore> {
    let rumor = RumorSet::new(graph.node_count(), rumor)?;
    let base = ChaCha8Rng::seed_from_u64(config.seed);
    let weight = 1.0 / config.walks_per_node as f64;
    let starts = rumor.complement();

    let per_node: Vec<(u32, Vec<Vec<NodeId>>)> = starts
        .par_iter()
        .map(|&u| {
            let mut prefixes = Vec::new();
            for i in 0..config.walks_per_node {
                let mut rng = walk_rng(&base, u, i);
                let walk = sample_walk(graph, u, &rumor, config.walk_length, &mut rng);
                if walk.hit {
                    prefixes.push(walk.prefix);
                }
            }
            (prefixes.len() as u32, prefixes)
        })
        .collect();

    let mut hit_counts = vec![0u32; graph.node_count()];
    let mut profiles = Vec::new();
    for (&u, (count, prefixes)) in starts.iter().zip(per_node) {
        hit_counts[u as usize] = count;
        profiles.extend(prefixes.into_iter().map(|prefix| WeightedProfile {
            start: u,
            weight,
            prefix,
        }));
    }
    SampleStore::from_weighted_profiles(StoreOrigin::Sampled(config), rumor, profiles, hit_counts)
}

/// Smallest `X` with `X >= ln(candidates / delta) / (2 epsilon^2)`.
pub fn hoeffding_sample_size(epsilon: f64, delta: f64, candidates: usize) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if candidates == 0 {
        return Err(Error::InvalidParameter("need at least one candidate".into()));
    }
    let x = (candidates as f64 / delta).ln() / (2.0 * epsilon * epsilon);
    Ok(x.ceil() as usize)
}
