//! Python bindings. Graphs are wrapped as `Graph`; structured results cross
//! the boundary as JSON strings, the same documents the CLI writes.

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use rnlab::distances::distance_to_property;
use rnlab::generators;
use rnlab::local::{estimate_matching, local_independent_set};
use rnlab::oracles::{OracleConfig, RnOracle};
use rnlab::properties::PropertySpec;
use rnlab::scenarios::{render_jsonl, run_scenario, ExperimentConfig};
use rnlab::stats::{edge_entropy, exact_stats};
use rnlab::testers::test_property as run_tester;
use rnlab::{canonicalize, WeightedGraph};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// `forest`, `bipartite`, `triangle_free`, `k_colorable:<k>`, or a JSON spec.
pub fn parse_property(text: &str) -> Result<PropertySpec, String> {
    match text {
        "forest" => Ok(PropertySpec::Forest),
        "bipartite" => Ok(PropertySpec::Bipartite),
        "triangle_free" => Ok(PropertySpec::triangle_free()),
        _ => match text.strip_prefix("k_colorable:") {
            Some(k) => k
                .parse()
                .map(|k| PropertySpec::KColorable { k })
                .map_err(|e| format!("bad k in {text}: {e}")),
            None => serde_json::from_str(text).map_err(|_| format!("unknown property {text}")),
        },
    }
}

#[pyclass(frozen, module = "rnlab")]
struct Graph {
    inner: WeightedGraph,
}

#[pymethods]
impl Graph {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Graph { inner: WeightedGraph::from_json(text).map_err(err)? })
    }

    #[staticmethod]
    fn binary_tree(depth: usize, beta: f64) -> PyResult<Self> {
        Ok(Graph { inner: generators::binary_tree(depth, beta).map_err(err)? })
    }

    #[staticmethod]
    fn path(n: usize) -> PyResult<Self> {
        Ok(Graph { inner: generators::path(n).map_err(err)? })
    }

    #[staticmethod]
    fn cycle(n: usize) -> PyResult<Self> {
        Ok(Graph { inner: generators::cycle(n).map_err(err)? })
    }

    #[staticmethod]
    fn grid(rows: usize, cols: usize) -> PyResult<Self> {
        Ok(Graph { inner: generators::grid(rows, cols).map_err(err)? })
    }

    #[staticmethod]
    fn random_regular(n: usize, d: usize, seed: u64) -> PyResult<Self> {
        Ok(Graph { inner: generators::random_regular(n, d, seed).map_err(err)? })
    }

    /// Same topology, random weights with ratio bound `k`.
    fn lipschitz_reweighted(&self, k: f64, seed: u64) -> PyResult<Self> {
        Ok(Graph { inner: generators::random_lipschitz_weights(&self.inner, k, seed).map_err(err)? })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }

    fn vertex_count(&self) -> usize {
        self.inner.vertex_count()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges()
    }

    fn probabilities(&self) -> Vec<f64> {
        self.inner.probabilities().to_vec()
    }

    fn ratio_bound(&self) -> f64 {
        self.inner.ratio_bound()
    }

    fn edge_entropy(&self) -> f64 {
        edge_entropy(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(n={}, m={}, d={}, K={})",
            self.inner.vertex_count(),
            self.inner.edge_count(),
            self.inner.degree_bound(),
            self.inner.ratio_bound()
        )
    }
}

/// Counts of canonical ball keys over `queries` Radon-Nikodym queries.
#[pyfunction]
fn sample(g: &Graph, r: usize, t: u32, queries: usize, seed: u64) -> PyResult<BTreeMap<String, u64>> {
    let cfg = OracleConfig::new(r, t, queries, seed).map_err(err)?;
    let mut counts = BTreeMap::new();
    for q in RnOracle::new(&g.inner).run(&cfg) {
        *counts.entry(canonicalize(&q.ball).to_hex()).or_insert(0) += 1;
    }
    Ok(counts)
}

/// Exact ball statistics as JSON.
#[pyfunction]
fn stats(g: &Graph, r: usize, t: u32) -> PyResult<String> {
    serde_json::to_string(&exact_stats(&g.inner, r, t)).map_err(err)
}

/// `(distance, witness_deletion_set)`.
#[pyfunction]
fn distance(g: &Graph, property: &str) -> PyResult<(f64, Vec<(usize, usize)>)> {
    let p = parse_property(property).map_err(err)?;
    let d = distance_to_property(&g.inner, &p).map_err(err)?;
    Ok((d.distance, d.witness_deletion_set))
}

/// Tester verdict as JSON.
#[pyfunction]
#[pyo3(signature = (g, property, epsilon, k = None, seed = 0))]
fn test_property(g: &Graph, property: &str, epsilon: f64, k: Option<f64>, seed: u64) -> PyResult<String> {
    let p = parse_property(property).map_err(err)?;
    let k = k.unwrap_or(g.inner.ratio_bound());
    let v = run_tester(&g.inner, &p, epsilon, k, seed).map_err(err)?;
    serde_json::to_string(&v).map_err(err)
}

/// `(value, members)` of the local independent set.
#[pyfunction]
#[pyo3(signature = (g, epsilon, seed = 0))]
fn estimate_independence(g: &Graph, epsilon: f64, seed: u64) -> PyResult<(f64, Vec<usize>)> {
    let r = local_independent_set(&g.inner, epsilon, seed).map_err(err)?;
    Ok((r.value, r.members))
}

#[pyfunction]
fn estimate_matching_number(g: &Graph, epsilon: f64) -> PyResult<f64> {
    Ok(estimate_matching(&g.inner, epsilon, 0).map_err(err)?.value)
}

/// Runs an experiment config (JSON) and returns the JSON-lines report.
#[pyfunction]
fn scenario(config: &str) -> PyResult<String> {
    let cfg: ExperimentConfig = serde_json::from_str(config).map_err(err)?;
    Ok(render_jsonl(&run_scenario(&cfg).map_err(err)?))
}

#[pymodule(name = "rnlab")]
fn rnlab_python(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Graph>()?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(stats, m)?)?;
    m.add_function(wrap_pyfunction!(distance, m)?)?;
    m.add_function(wrap_pyfunction!(test_property, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_independence, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_matching_number, m)?)?;
    m.add_function(wrap_pyfunction!(scenario, m)?)?;
    Ok(())
}
