//! Python bindings: sampling, graph queries, routing and experiments.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use girg::experiments::{read_trials_csv, run_experiment as run_trials, summarize as summarize_trials};
use girg::experiments::{write_summary_csv, write_trials_csv};
use girg::hyperbolic::{self, HyperbolicParams};
use girg::patching::{default_patch_step_limit, patch_route as patch, patch_route_history, PatchOutcome};
use girg::routing::{self, default_step_limit, ObjectiveSpec, Relaxation, Score};
use girg::{model, search, Alpha, Error, Graph, ModelParams};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyIOError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for Result<T, Error> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

/// GIRG parameters. `alpha=None` selects the threshold model.
#[pyclass(name = "ModelParams", frozen)]
struct PyModelParams {
    inner: ModelParams,
}

#[pymethods]
impl PyModelParams {
    #[new]
    #[pyo3(signature = (n, d=2, beta=2.5, wmin=1.0, alpha=None, kernel_c=1.0, c1=1.0, ep3=false, seed=0))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        n: f64,
        d: usize,
        beta: f64,
        wmin: f64,
        alpha: Option<f64>,
        kernel_c: f64,
        c1: f64,
        ep3: bool,
        seed: u64,
    ) -> PyResult<Self> {
        let alpha = alpha.map_or(Alpha::Infinite, Alpha::Finite);
        let inner = ModelParams::new(n, d, beta, wmin, alpha)
            .with_kernel_c(kernel_c)
            .with_c1(c1)
            .with_ep3(ep3)
            .with_seed(seed);
        inner.validate().py()?;
        Ok(PyModelParams { inner })
    }

    #[getter]
    fn n(&self) -> f64 {
        self.inner.n
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }

    #[getter]
    fn wmin(&self) -> f64 {
        self.inner.w_min
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "ModelParams(n={}, d={}, beta={}, wmin={}, alpha={}, seed={})",
            p.n, p.d, p.beta, p.w_min, p.alpha, p.seed
        )
    }
}

/// Hyperbolic random graph parameters; `t_h=0` is the threshold model.
#[pyclass(name = "HyperbolicParams", frozen)]
struct PyHyperbolicParams {
    inner: HyperbolicParams,
}

#[pymethods]
impl PyHyperbolicParams {
    #[new]
    #[pyo3(signature = (n, alpha_h=0.75, c_h=0.0, t_h=0.0, seed=0))]
    fn new(n: usize, alpha_h: f64, c_h: f64, t_h: f64, seed: u64) -> PyResult<Self> {
        let inner = HyperbolicParams::new(n, alpha_h, c_h, t_h).with_seed(seed);
        inner.validate().py()?;
        Ok(PyHyperbolicParams { inner })
    }

    #[getter]
    fn radius(&self) -> f64 {
        self.inner.radius()
    }
}

#[pyclass(name = "Graph", frozen)]
struct PyGraph {
    inner: Graph,
}

#[pymethods]
impl PyGraph {
    #[staticmethod]
    fn sample(params: &PyModelParams) -> PyResult<Self> {
        Ok(PyGraph {
            inner: model::sample_graph(&params.inner).py()?,
        })
    }

    #[staticmethod]
    fn sample_hyperbolic(params: &PyHyperbolicParams) -> PyResult<Self> {
        Ok(PyGraph {
            inner: hyperbolic::sample_hyperbolic_graph(&params.inner).py()?,
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyGraph {
            inner: girg::io::load_graph(path).py()?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        girg::io::save_graph(&self.inner, path).py()
    }

    fn vertex_count(&self) -> usize {
        self.inner.vertex_count()
    }

    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    fn __len__(&self) -> usize {
        self.inner.vertex_count()
    }

    fn neighbors(&self, v: usize) -> PyResult<Vec<usize>> {
        self.inner.check_vertex(v).py()?;
        Ok(self.inner.neighbors(v).iter().map(|&u| u as usize).collect())
    }

    fn degree(&self, v: usize) -> PyResult<usize> {
        self.inner.check_vertex(v).py()?;
        Ok(self.inner.degree(v))
    }

    fn weight(&self, v: usize) -> PyResult<f64> {
        self.inner.check_vertex(v).py()?;
        Ok(self.inner.weight(v))
    }

    fn position(&self, v: usize) -> PyResult<Vec<f64>> {
        self.inner.check_vertex(v).py()?;
        Ok(self.inner.pos(v).to_vec())
    }

    /// Edges `(u, v)` with `u < v`.
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().collect()
    }

    fn is_hyperbolic(&self) -> bool {
        self.inner.hyperbolic().is_some()
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(vertices={}, edges={})",
            self.inner.vertex_count(),
            self.inner.edge_count()
        )
    }
}

/// Outcome of one routed message.
#[pyclass(name = "RouteResult", frozen, get_all)]
struct PyRouteResult {
    path: Vec<usize>,
    status: String,
    steps: usize,
    distinct_visited: usize,
    max_vertex_memory_words: usize,
    event_log: String,
}

impl From<PatchOutcome> for PyRouteResult {
    fn from(o: PatchOutcome) -> Self {
        PyRouteResult {
            event_log: o.event_log_text(),
            status: o.status.to_string(),
            steps: o.steps,
            distinct_visited: o.distinct_visited,
            max_vertex_memory_words: o.max_vertex_memory_words,
            path: o.path,
        }
    }
}

#[pymethods]
impl PyRouteResult {
    fn delivered(&self) -> bool {
        self.status == "DELIVERED"
    }

    fn __repr__(&self) -> String {
        format!("RouteResult(status={}, steps={})", self.status, self.steps)
    }
}

fn objective(name: &str, relax_seed: u64) -> PyResult<ObjectiveSpec> {
    match name {
        "phi" => Ok(ObjectiveSpec::Phi),
        "phi-relaxed" => Ok(ObjectiveSpec::PhiRelaxed(Relaxation {
            seed: relax_seed,
            ..Relaxation::default()
        })),
        "phi-h" => Ok(ObjectiveSpec::PhiH),
        other => Err(PyValueError::new_err(format!("unknown objective `{other}`"))),
    }
}

/// Greedy routing from `source` to `target`.
#[pyfunction]
#[pyo3(signature = (graph, source, target, objective="phi", step_limit=None, relax_seed=0))]
fn greedy_route(
    graph: &PyGraph,
    source: usize,
    target: usize,
    objective: &str,
    step_limit: Option<usize>,
    relax_seed: u64,
) -> PyResult<PyRouteResult> {
    let g = &graph.inner;
    let obj = self::objective(objective, relax_seed)?.bind(g, target).py()?;
    let limit = step_limit.unwrap_or_else(|| default_step_limit(g.vertex_count()));
    let route = routing::greedy_route(g, source, obj.as_ref(), limit).py()?;
    Ok(PatchOutcome::from_greedy(&route).into())
}

/// Patched routing; `history=True` selects the variant that carries the
/// visited set in the message.
#[pyfunction]
#[pyo3(signature = (graph, source, target, objective="phi", history=false, step_limit=None, relax_seed=0))]
fn patch_route(
    graph: &PyGraph,
    source: usize,
    target: usize,
    objective: &str,
    history: bool,
    step_limit: Option<usize>,
    relax_seed: u64,
) -> PyResult<PyRouteResult> {
    let g = &graph.inner;
    let obj = self::objective(objective, relax_seed)?.bind(g, target).py()?;
    let limit = step_limit.unwrap_or_else(|| default_patch_step_limit(g.vertex_count()));
    let o = if history {
        patch_route_history(g, source, obj.as_ref(), limit)
    } else {
        patch(g, source, obj.as_ref(), limit)
    };
    Ok(o.py()?.into())
}

/// Exact objective of `v` towards `t`; `inf` for `v == t`.
#[pyfunction]
fn phi(graph: &PyGraph, v: usize, t: usize) -> PyResult<f64> {
    Ok(match routing::phi(&graph.inner, v, t).py()? {
        Score::Finite(x) => x,
        Score::Top => f64::INFINITY,
    })
}

/// Hop distance, or `None` when `s` and `t` are disconnected.
#[pyfunction]
fn bfs_distance(graph: &PyGraph, s: usize, t: usize) -> PyResult<Option<usize>> {
    Ok(search::bfs_distance(&graph.inner, s, t).py()?.finite())
}

/// Component id of every vertex.
#[pyfunction]
fn connected_components(graph: &PyGraph) -> Vec<usize> {
    search::connected_components(&graph.inner).component_id
}

#[pyfunction]
fn torus_distance(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    let x = girg::TorusPoint::new(x).py()?;
    let y = girg::TorusPoint::new(y).py()?;
    girg::torus_distance(&x, &y).py()
}

/// Runs the experiment described by a config text and returns the trial CSV.
#[pyfunction]
fn run_experiment(config: &str) -> PyResult<String> {
    let cfg = girg::config::parse_config(config).py()?;
    let records = run_trials(&cfg).py()?;
    let mut buf = Vec::new();
    write_trials_csv(&records, &mut buf).py()?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Summary CSV of a trial CSV.
#[pyfunction]
fn summarize(trials_csv: &str) -> PyResult<String> {
    let records = read_trials_csv(trials_csv.as_bytes()).py()?;
    let rows = summarize_trials(&records).py()?;
    let mut buf = Vec::new();
    write_summary_csv(&rows, &mut buf).py()?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

#[pymodule]
#[pyo3(name = "girg_nav")]
fn girg_nav_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelParams>()?;
    m.add_class::<PyHyperbolicParams>()?;
    m.add_class::<PyGraph>()?;
    m.add_class::<PyRouteResult>()?;
    m.add_function(wrap_pyfunction!(greedy_route, m)?)?;
    m.add_function(wrap_pyfunction!(patch_route, m)?)?;
    m.add_function(wrap_pyfunction!(phi, m)?)?;
    m.add_function(wrap_pyfunction!(bfs_distance, m)?)?;
    m.add_function(wrap_pyfunction!(connected_components, m)?)?;
    m.add_function(wrap_pyfunction!(torus_distance, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(summarize, m)?)?;
    Ok(())
}
