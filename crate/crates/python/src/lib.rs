//! Python bindings: graphs, sample stores, the logistic model and the solvers.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use rcic_core::solvers::{self, BabOptions, BoundEstimator};
use rcic_core::{block, oracle, walk};

fn err(e: rcic_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "Graph", frozen)]
struct PyGraph(rcic_core::Graph);

#[pymethods]
impl PyGraph {
    #[new]
    #[pyo3(signature = (node_count, edges, directed = false))]
    fn new(node_count: usize, edges: Vec<(u32, u32)>, directed: bool) -> PyResult<Self> {
        rcic_core::Graph::from_edges(node_count, edges, directed)
            .map(Self)
            .map_err(err)
    }

    /// Loads a whitespace-separated edge list; ids are remapped to `0..n`.
    #[staticmethod]
    #[pyo3(signature = (path, directed = false))]
    fn load(path: &str, directed: bool) -> PyResult<Self> {
        rcic_core::graph::load_edge_list_file(path, directed)
            .map(Self)
            .map_err(err)
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.0.node_count()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.0.edge_count()
    }

    #[getter]
    fn directed(&self) -> bool {
        self.0.is_directed()
    }

    fn neighbors(&self, u: u32) -> PyResult<Vec<u32>> {
        self.0.neighbors(u).map(<[u32]>::to_vec).map_err(err)
    }

    fn degree(&self, u: u32) -> PyResult<usize> {
        self.0.neighbors(u).map(<[u32]>::len).map_err(err)
    }

    fn original_id(&self, u: u32) -> PyResult<u64> {
        self.0.neighbors(u).map_err(err)?;
        Ok(self.0.original_id(u))
    }

    fn top_decile_nodes(&self) -> PyResult<Vec<u32>> {
        self.0.top_decile_nodes().map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(nodes={}, edges={}, directed={})",
            self.0.node_count(),
            self.0.edge_count(),
            self.0.is_directed()
        )
    }
}

#[pyclass(name = "LogisticParams", frozen)]
struct PyParams(rcic_core::LogisticParams);

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (alpha = 7.0, beta = 3.0))]
    fn new(alpha: f64, beta: f64) -> PyResult<Self> {
        rcic_core::LogisticParams::new(alpha, beta).map(Self).map_err(err)
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha()
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.0.beta()
    }

    /// Block value of a walk with `count` impressions.
    fn block(&self, count: usize) -> f64 {
        self.0.block(count)
    }

    /// Tangency count of the envelope anchored at `c0`.
    fn tangent(&self, c0: f64) -> PyResult<f64> {
        block::EnvelopeAnchor::at(&self.0, c0).map(|a| a.tangent_c).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("LogisticParams(alpha={}, beta={})", self.0.alpha(), self.0.beta())
    }
}

#[pyclass(name = "SampleStore", frozen)]
struct PyStore(walk::SampleStore);

#[pymethods]
impl PyStore {
    /// `samples` seeded walks of at most `walk_length` steps from every node.
    #[staticmethod]
    #[pyo3(signature = (graph, rumor, walk_length, samples, seed = 0))]
    fn sample(graph: &PyGraph, rumor: Vec<u32>, walk_length: usize, samples: usize, seed: u64) -> PyResult<Self> {
        let config = rcic_core::SampleConfig::new(walk_length, samples, seed).map_err(err)?;
        rcic_core::build_sample_store(&graph.0, &rumor, config)
            .map(Self)
            .map_err(err)
    }

    /// Every walk outcome weighted by its exact probability (small graphs only).
    #[staticmethod]
    fn exact(graph: &PyGraph, rumor: Vec<u32>, walk_length: usize) -> PyResult<Self> {
        oracle::build_exact_store(&graph.0, &rumor, walk_length)
            .map(|s| Self(s.into_store()))
            .map_err(err)
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.0.node_count()
    }

    /// Number of stored walks that reach the rumor set.
    #[getter]
    fn walk_count(&self) -> usize {
        self.0.walk_count()
    }

    #[getter]
    fn rumor(&self) -> Vec<u32> {
        self.0.rumor().members().to_vec()
    }

    fn hit_count(&self, u: u32) -> PyResult<u32> {
        if u as usize >= self.0.node_count() {
            return Err(err(rcic_core::Error::NodeOutOfRange {
                node: u,
                node_count: self.0.node_count(),
            }));
        }
        Ok(self.0.hit_count(u))
    }

    fn influenced_mass(&self) -> f64 {
        self.0.influenced_mass()
    }

    fn to_json(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        self.0.write_json(&mut buf).map_err(err)?;
        String::from_utf8(buf).map_err(|e| PyValueError::new_err(e.to_string()))
    }
}

#[pyclass(name = "SolveReport", frozen, get_all)]
struct PyReport {
    chosen: Vec<u32>,
    objective: f64,
    blocking_percentage: Option<f64>,
    wall_time: f64,
    expansions: usize,
    bound_calls: usize,
    gain_evaluations: u64,
    truncated: bool,
}

impl From<solvers::SolveReport> for PyReport {
    fn from(r: solvers::SolveReport) -> Self {
        Self {
            objective: r.objective,
            blocking_percentage: r.blocking_percentage,
            wall_time: r.wall_time.as_secs_f64(),
            expansions: r.expansions,
            bound_calls: r.bound_calls,
            gain_evaluations: r.gain_evaluations,
            truncated: r.truncated,
            chosen: r.chosen,
        }
    }
}

#[pymethods]
impl PyReport {
    fn __repr__(&self) -> String {
        format!("SolveReport(chosen={:?}, objective={})", self.chosen, self.objective)
    }
}

#[pyfunction]
fn estimate_objective(store: &PyStore, params: &PyParams, protectors: Vec<u32>) -> PyResult<f64> {
    block::estimate_objective(&store.0, &params.0, &protectors).map_err(err)
}

#[pyfunction]
fn blocking_percentage(store: &PyStore, params: &PyParams, protectors: Vec<u32>) -> PyResult<f64> {
    block::blocking_percentage(&store.0, &params.0, &protectors).map_err(err)
}

#[pyfunction]
fn hoeffding_sample_size(epsilon: f64, delta: f64, candidates: usize) -> PyResult<usize> {
    walk::hoeffding_sample_size(epsilon, delta, candidates).map_err(err)
}

#[pyfunction]
fn generate_rumor_set(graph: &PyGraph, size: usize, seed: u64) -> PyResult<Vec<u32>> {
    rcic_core::bench::generate_rumor_set(&graph.0, size, seed).map_err(err)
}

#[pyfunction]
fn solve_topk(store: &PyStore, params: &PyParams, k: usize) -> PyResult<PyReport> {
    solvers::solve_topk(&store.0, &params.0, k).map(Into::into).map_err(err)
}

#[pyfunction]
fn solve_greedy(store: &PyStore, params: &PyParams, k: usize) -> PyResult<PyReport> {
    solvers::solve_greedy(&store.0, &params.0, k)
        .map(Into::into)
        .map_err(err)
}

/// Branch and bound; `estimator` is "greedy" or "progressive".
#[pyfunction]
#[pyo3(signature = (store, params, k, estimator = "greedy", rho = 0.1, node_cap = None, certified = false))]
fn branch_and_bound(
    store: &PyStore,
    params: &PyParams,
    k: usize,
    estimator: &str,
    rho: f64,
    node_cap: Option<usize>,
    certified: bool,
) -> PyResult<PyReport> {
    let estimator = match estimator {
        "greedy" => BoundEstimator::Greedy,
        "progressive" => BoundEstimator::Progressive { rho },
        other => return Err(PyValueError::new_err(format!("unknown estimator '{other}'"))),
    };
    let mut options = BabOptions::new(estimator, k);
    options.limits.node_expansion_cap = node_cap;
    options.certified_epsilon = certified.then_some(0.0);
    solvers::branch_and_bound(&store.0, &params.0, options)
        .map(Into::into)
        .map_err(err)
}

/// Exhaustive optimum `(protectors, value)` on a small graph.
#[pyfunction]
fn exhaustive_optimum(
    graph: &PyGraph,
    params: &PyParams,
    rumor: Vec<u32>,
    k: usize,
    walk_length: usize,
) -> PyResult<(Vec<u32>, f64)> {
    oracle::exhaustive_optimum(&graph.0, &params.0, &rumor, k, walk_length).map_err(err)
}

#[pymodule]
fn rcic(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyParams>()?;
    m.add_class::<PyStore>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(estimate_objective, m)?)?;
    m.add_function(wrap_pyfunction!(blocking_percentage, m)?)?;
    m.add_function(wrap_pyfunction!(hoeffding_sample_size, m)?)?;
    m.add_function(wrap_pyfunction!(generate_rumor_set, m)?)?;
    m.add_function(wrap_pyfunction!(solve_topk, m)?)?;
    m.add_function(wrap_pyfunction!(solve_greedy, m)?)?;
    m.add_function(wrap_pyfunction!(branch_and_bound, m)?)?;
    m.add_function(wrap_pyfunction!(exhaustive_optimum, m)?)?;
    Ok(())
}
