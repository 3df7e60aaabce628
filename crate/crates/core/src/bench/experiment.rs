use std::path::Path;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{Algorithm, ExperimentConfig};
use super::report::{peak_memory_kb, round6, ReportRow};
use crate::block::LogisticParams;
use crate::error::{Error, Result};
use crate::graph::{load_edge_list_file, Graph, NodeId};
use crate::solvers::{branch_and_bound, solve_greedy, solve_topk, SolveReport};
use crate::walk::{build_sample_store, hoeffding_sample_size, SampleConfig, SampleStore};

/// `size` nodes drawn uniformly without replacement from the top tenth of
/// nodes by degree, returned sorted. Deterministic per seed.
pub fn generate_rumor_set(graph: &Graph, size: usize, seed: u64) -> Result<Vec<NodeId>> {
    let top = graph.top_decile_nodes()?;
    if size == 0 || size > top.len() {
        return Err(Error::InvalidRumorSet(format!(
            "rumor set size must lie in 1..={}, the number of top-decile nodes; got {size}",
            top.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<NodeId> = top.choose_multiple(&mut rng, size).copied().collect();
    chosen.sort_unstable();
    Ok(chosen)
}

/// Runs every algorithm at every sweep point and seed of `config` on the
/// graph file it names.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    config.validate()?;
    let graph = load_edge_list_file(&config.graph, config.directed)?;
    Ok(run_on_graph(&graph, &graph_name(&config.graph), config))
}

/// Like [`run_experiment`] on an already loaded graph. Rows come sorted by
/// algorithm (in the configured order), sweep point and seed. A failure
/// stops the run; the rows so far are kept and a `failed: ...` marker row
/// closes the list.
pub fn run_on_graph(graph: &Graph, name: &str, config: &ExperimentConfig) -> Vec<ReportRow> {
    let mut runner = Runner::new(config);
    for (index, point) in config.points().into_iter().enumerate() {
        let (cfg, label) = match point {
            Some((axis, value)) => match config.at(axis, value) {
                Ok(cfg) => (cfg, Some((axis.name(), value))),
                Err(e) => return runner.fail(graph, name, config, None, config.seed, e),
            },
            None => (config.clone(), None),
        };
        for rep in 0..config.repeats as u64 {
            let seed = config.seed + rep;
            if let Err(e) = runner.point(index, graph, name, &cfg, label, seed) {
                return runner.fail(graph, name, &cfg, label, seed, e);
            }
        }
    }
    runner.finish()
}

/// Runs `config` on nested breadth-first subgraphs covering each fraction
/// of the nodes, grown from the highest-degree node. The rumor set is
/// redrawn on every slice with the same rumor seed.
pub fn run_scalability(config: &ExperimentConfig, fractions: &[f64]) -> Result<Vec<ReportRow>> {
    config.validate()?;
    check_fractions(fractions)?;
    if config.sweep.is_some() {
        return Err(Error::InvalidParameter("scalability runs take no sweep".into()));
    }
    let graph = load_edge_list_file(&config.graph, config.directed)?;
    Ok(scalability_on_graph(
        &graph,
        &graph_name(&config.graph),
        config,
        fractions,
    ))
}

pub fn scalability_on_graph(graph: &Graph, name: &str, config: &ExperimentConfig, fractions: &[f64]) -> Vec<ReportRow> {
    let root = (0..graph.node_count() as NodeId)
        .max_by(|&a, &b| graph.degree(a).cmp(&graph.degree(b)).then(b.cmp(&a)))
        .unwrap_or(0);
    let mut runner = Runner::new(config);
    for (index, &fraction) in fractions.iter().enumerate() {
        let label = Some(("fraction", fraction));
        let slice = match graph.bfs_subgraph(root, fraction) {
            Ok((slice, _)) => slice,
            Err(e) => return runner.fail(graph, name, config, label, config.seed, e),
        };
        for rep in 0..config.repeats as u64 {
            let seed = config.seed + rep;
            if let Err(e) = runner.point(index, &slice, name, config, label, seed) {
                return runner.fail(&slice, name, config, label, seed, e);
            }
        }
    }
    runner.finish()
}

pub fn check_fractions(fractions: &[f64]) -> Result<()> {
    let in_range = fractions.iter().all(|&f| f > 0.0 && f <= 1.0);
    if fractions.is_empty() || !in_range || fractions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(format!(
            "fractions must be strictly ascending within (0, 1], got {fractions:?}"
        )));
    }
    Ok(())
}

fn graph_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Identifies a sample store: rebuilt only when one of these changes.
#[derive(PartialEq)]
struct StoreKey {
    node_count: usize,
    edge_count: usize,
    rumor: Vec<NodeId>,
    walk_length: usize,
    samples: usize,
    seed: u64,
}

struct Runner {
    algorithms: Vec<Algorithm>,
    /// Row with its sort key (algorithm position, point position, seed).
    rows: Vec<((usize, usize, u64), ReportRow)>,
    store: Option<(StoreKey, SampleStore)>,
}

impl Runner {
    fn new(config: &ExperimentConfig) -> Self {
        Self {
            algorithms: config.algorithms.clone(),
            rows: Vec::new(),
            store: None,
        }
    }

    fn point(
        &mut self,
        index: usize,
        graph: &Graph,
        name: &str,
        cfg: &ExperimentConfig,
        label: Option<(&'static str, f64)>,
        seed: u64,
    ) -> Result<()> {
        let rumor = generate_rumor_set(graph, cfg.rumor_size, cfg.rumor_seed)?;
        let samples = match (cfg.epsilon, cfg.delta) {
            (Some(eps), Some(delta)) => hoeffding_sample_size(eps, delta, graph.node_count() - rumor.len())?,
            _ => cfg.samples,
        };
        let key = StoreKey {
            node_count: graph.node_count(),
            edge_count: graph.edge_count(),
            rumor,
            walk_length: cfg.walk_length,
            samples,
            seed,
        };
        if self.store.as_ref().is_none_or(|(k, _)| *k != key) {
            self.store = None;
            let store = build_sample_store(graph, &key.rumor, SampleConfig::new(cfg.walk_length, samples, seed)?)?;
            self.store = Some((key, store));
        }
        let store = &self.store.as_ref().expect("store just built").1;
        let params = LogisticParams::new(cfg.alpha, cfg.beta)?;

        for (position, &algorithm) in self.algorithms.iter().enumerate() {
            let report = solve(store, &params, cfg, algorithm)?;
            let mut row = base_row(graph, name, cfg, label, seed, samples);
            fill(&mut row, graph, algorithm, &report);
            self.rows.push(((position, index, seed), row));
        }
        Ok(())
    }

    fn fail(
        mut self,
        graph: &Graph,
        name: &str,
        cfg: &ExperimentConfig,
        label: Option<(&'static str, f64)>,
        seed: u64,
        error: Error,
    ) -> Vec<ReportRow> {
        let mut marker = base_row(graph, name, cfg, label, seed, cfg.samples);
        marker.status = format!("failed: {error}");
        let mut rows = std::mem::take(&mut self.rows);
        rows.sort_by_key(|(key, _)| *key);
        let mut rows: Vec<ReportRow> = rows.into_iter().map(|(_, r)| r).collect();
        rows.push(marker);
        rows
    }

    fn finish(mut self) -> Vec<ReportRow> {
        self.rows.sort_by_key(|(key, _)| *key);
        self.rows.into_iter().map(|(_, r)| r).collect()
    }
}

pub fn solve(
    store: &SampleStore,
    params: &LogisticParams,
    cfg: &ExperimentConfig,
    algorithm: Algorithm,
) -> Result<SolveReport> {
    match algorithm {
        Algorithm::TopK => solve_topk(store, params, cfg.k),
        Algorithm::Greedy => solve_greedy(store, params, cfg.k),
        Algorithm::Bab | Algorithm::ProBab => {
            let options = cfg.bab_options(algorithm).expect("search algorithm");
            branch_and_bound(store, params, options)
        }
    }
}

fn base_row(
    graph: &Graph,
    name: &str,
    cfg: &ExperimentConfig,
    label: Option<(&'static str, f64)>,
    seed: u64,
    samples: usize,
) -> ReportRow {
    ReportRow {
        graph: name.to_owned(),
        algorithm: "-".into(),
        sweep_axis: label.map_or("none", |(axis, _)| axis).to_owned(),
        sweep_value: label.map(|(_, v)| v),
        seed,
        rumor_seed: cfg.rumor_seed,
        directed: graph.is_directed(),
        k: cfg.k,
        rumor_size: cfg.rumor_size,
        walk_length: cfg.walk_length,
        alpha: cfg.alpha,
        beta: cfg.beta,
        samples,
        rho: cfg.rho,
        certified_bounds: cfg.certified_bounds,
        node_cap: cfg.node_cap,
        time_cap_s: cfg.time_cap.map(|d| d.as_secs_f64()),
        node_count: graph.node_count(),
        edge_count: graph.edge_count(),
        status: "ok".into(),
        ..ReportRow::default()
    }
}

fn fill(row: &mut ReportRow, graph: &Graph, algorithm: Algorithm, report: &SolveReport) {
    row.algorithm = algorithm.name().into();
    row.chosen_size = report.chosen.len();
    row.objective = Some(round6(report.objective));
    row.blocking_percentage = report.blocking_percentage.map(round6);
    row.wall_time_ms = report.wall_time.as_millis() as u64;
    row.peak_memory_kb = peak_memory_kb();
    row.expansions = report.expansions;
    row.bound_calls = report.bound_calls;
    row.gain_evaluations = report.gain_evaluations;
    row.truncated = report.truncated;
    row.chosen = report
        .chosen
        .iter()
        .map(|&v| graph.original_id(v).to_string())
        .collect::<Vec<_>>()
        .join(" ");
}
