//! Graph loading and slicing for SNAP-style edge lists.
//!
//! Node ids are remapped to a dense `0..n` range in ascending order of the
//! ids found in the file; the original ids are kept in a side table so that
//! results can be reported in the file's own numbering.

use std::collections::{BTreeSet, VecDeque};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Dense node index, always `< node_count` of the owning graph.
pub type NodeId = u32;

/// Immutable adjacency structure in compressed sparse row form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    edge_count: usize,
    directed: bool,
    original_ids: Vec<u64>,
}

impl Graph {
    /// Builds a graph from dense edges. Self-loops are dropped and duplicates
    /// removed; undirected edges are stored in both adjacency lists.
    pub fn from_edges(
        node_count: usize,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
        directed: bool,
    ) -> Result<Self> {
        let mut lists: Vec<BTreeSet<NodeId>> = vec![BTreeSet::new(); node_count];
        for (u, v) in edges {
            for x in [u, v] {
                if x as usize >= node_count {
                    return Err(Error::NodeOutOfRange { node: x, node_count });
                }
            }
            if u == v {
                continue;
            }
            lists[u as usize].insert(v);
            if !directed {
                lists[v as usize].insert(u);
            }
        }
        let mut offsets = Vec::with_capacity(node_count + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for list in &lists {
            targets.extend(list.iter().copied());
            offsets.push(targets.len());
        }
        let edge_count = if directed { targets.len() } else { targets.len() / 2 };
        Ok(Self {
            offsets,
            targets,
            edge_count,
            directed,
            original_ids: (0..node_count as u64).collect(),
        })
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Id of `u` in the source the graph was loaded from.
    pub fn original_id(&self, u: NodeId) -> u64 {
        self.original_ids[u as usize]
    }

    pub fn original_ids(&self) -> &[u64] {
        &self.original_ids
    }

    pub fn neighbors(&self, u: NodeId) -> Result<&[NodeId]> {
        if u as usize >= self.node_count() {
            return Err(Error::NodeOutOfRange {
                node: u,
                node_count: self.node_count(),
            });
        }
        Ok(self.adj(u))
    }

    /// Unchecked variant of [`Graph::neighbors`] for hot loops.
    #[inline]
    pub fn adj(&self, u: NodeId) -> &[NodeId] {
        let u = u as usize;
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    /// Out-degree for directed graphs.
    #[inline]
    pub fn degree(&self, u: NodeId) -> usize {
        let u = u as usize;
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.node_count() as NodeId)
            .map(|u| self.degree(u))
            .max()
            .unwrap_or(0)
    }

    /// The `ceil(n / 10)` nodes of highest degree, ties toward smaller ids.
    pub fn top_decile_nodes(&self) -> Result<Vec<NodeId>> {
        let n = self.node_count();
        if n < 10 {
            return Err(Error::InvalidParameter(format!(
                "top decile needs at least 10 nodes, graph has {n}"
            )));
        }
        let mut nodes: Vec<NodeId> = (0..n as NodeId).collect();
        nodes.sort_by(|&a, &b| self.degree(b).cmp(&self.degree(a)).then(a.cmp(&b)));
        nodes.truncate(n.div_ceil(10));
        Ok(nodes)
    }

    /// Induced subgraph on the first `ceil(fraction * n)` nodes reached by a
    /// breadth-first traversal from `seed` (or the whole reachable component
    /// if it is smaller). Nodes keep their relative order; the returned map
    /// gives, for each new id, the id in `self`.
    pub fn bfs_subgraph(&self, seed: NodeId, fraction: f64) -> Result<(Graph, Vec<NodeId>)> {
        let n = self.node_count();
        self.neighbors(seed)?;
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "fraction must lie in (0, 1], got {fraction}"
            )));
        }
        let target = ((fraction * n as f64) - 1e-9).ceil().max(1.0) as usize;

        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        let mut collected = Vec::with_capacity(target);
        seen[seed as usize] = true;
        queue.push_back(seed);
        while let Some(u) = queue.pop_front() {
            collected.push(u);
            if collected.len() == target {
                break;
            }
            for &v in self.adj(u) {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    queue.push_back(v);
                }
            }
        }
        collected.sort_unstable();

        let mut new_id = vec![NodeId::MAX; n];
        for (i, &u) in collected.iter().enumerate() {
            new_id[u as usize] = i as NodeId;
        }
        let mut edges = Vec::new();
        for &u in &collected {
            for &v in self.adj(u) {
                let (a, b) = (new_id[u as usize], new_id[v as usize]);
                if b != NodeId::MAX && (self.directed || a < b) {
                    edges.push((a, b));
                }
            }
        }
        let mut sub = Graph::from_edges(collected.len(), edges, self.directed)?;
        sub.original_ids = collected.iter().map(|&u| self.original_id(u)).collect();
        Ok((sub, collected))
    }

    /// Writes the graph back out as an edge list using the original ids.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "# nodes: {} edges: {} {}",
            self.node_count(),
            self.edge_count,
            if self.directed { "directed" } else { "undirected" }
        )?;
        for u in 0..self.node_count() as NodeId {
            for &v in self.adj(u) {
                if self.directed || u < v {
                    writeln!(out, "{}\t{}", self.original_id(u), self.original_id(v))?;
                }
            }
        }
        Ok(())
    }
}

/// Parses a SNAP edge list: `#` comment lines, blank lines, and otherwise
/// exactly two whitespace-separated non-negative integer ids per line.
pub fn load_edge_list<R: BufRead>(source: R, directed: bool) -> Result<Graph> {
    let mut raw = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let mut parse = |what: &str| -> Result<u64> {
            let tok = tokens.next().ok_or_else(|| Error::Parse {
                line: idx + 1,
                message: format!("missing {what} id"),
            })?;
            tok.parse::<u64>().map_err(|_| Error::Parse {
                line: idx + 1,
                message: format!("invalid {what} id {tok:?}"),
            })
        };
        let src = parse("source")?;
        let dst = parse("target")?;
        if let Some(extra) = tokens.next() {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("unexpected trailing token {extra:?}"),
            });
        }
        raw.push((src, dst));
    }

    let mut ids: Vec<u64> = raw.iter().flat_map(|&(a, b)| [a, b]).collect();
    ids.sort_unstable();
    ids.dedup();
    let dense = |x: u64| ids.binary_search(&x).expect("id collected above") as NodeId;
    let edges: Vec<(NodeId, NodeId)> = raw.iter().map(|&(a, b)| (dense(a), dense(b))).collect();
    let mut graph = Graph::from_edges(ids.len(), edges, directed)?;
    if graph.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    graph.original_ids = ids;
    Ok(graph)
}

/// Loads an edge-list file from disk.
pub fn load_edge_list_file(path: impl AsRef<std::path::Path>, directed: bool) -> Result<Graph> {
    let file = std::fs::File::open(path)?;
    load_edge_list(std::io::BufReader::new(file), directed)
}
