//! Python bindings for the `kosr` crate.

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use kosr::engine::{oracle_topk, Engine, QueryOptions};
use kosr::graph::{load_categories, load_graph};
use kosr::{Error, IndexStore, LabelLookup, VertexId};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyOSError::new_err(io.to_string()),
        Error::Corrupt(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

type Route = (u64, Vec<String>);

/// A graph with its label and category indexes, ready for queries.
#[pyclass(name = "KosrIndex", module = "kosr_py")]
struct PyKosrIndex {
    inner: kosr::KosrIndex,
}

impl PyKosrIndex {
    fn names(&self, vertices: &[VertexId]) -> Vec<String> {
        vertices
            .iter()
            .map(|&v| self.inner.names.name(v).to_string())
            .collect()
    }

    fn vertex(&self, name: &str) -> PyResult<VertexId> {
        self.inner.names.resolve(name).map_err(to_py)
    }
}

#[pymethods]
impl PyKosrIndex {
    /// Builds from an edge list (`u v w` lines) and `vertex category` lines.
    #[staticmethod]
    #[pyo3(signature = (edges, categories, directed = true))]
    fn from_text(edges: &str, categories: &str, directed: bool) -> PyResult<Self> {
        let (graph, names) = load_graph(edges.as_bytes(), directed).map_err(to_py)?;
        let cm = load_categories(categories.as_bytes(), &names).map_err(to_py)?;
        Ok(PyKosrIndex {
            inner: kosr::KosrIndex::build(graph, names, cm),
        })
    }

    /// The eight-vertex running example.
    #[staticmethod]
    fn example() -> Self {
        let f = kosr::fixtures::fixture_fig1();
        PyKosrIndex {
            inner: kosr::KosrIndex::build(f.graph, f.names, f.categories),
        }
    }

    /// Loads an index directory written by `kosr build`.
    #[staticmethod]
    fn load(dir: &str) -> PyResult<Self> {
        Ok(PyKosrIndex {
            inner: IndexStore::new(dir).load().map_err(to_py)?,
        })
    }

    fn save(&self, dir: &str) -> PyResult<()> {
        IndexStore::new(dir).save(&self.inner).map_err(to_py)
    }

    #[getter]
    fn vertex_count(&self) -> usize {
        self.inner.graph.vertex_count()
    }

    #[getter]
    fn categories(&self) -> Vec<String> {
        let cm = &self.inner.categories;
        (0..cm.category_count() as u32)
            .map(|c| cm.name(c).to_string())
            .collect()
    }

    /// Top-k routes as `(cost, witness)` pairs, cheapest first.
    #[pyo3(signature = (source, target, categories, k, engine = "sk"))]
    fn query(
        &self,
        source: &str,
        target: &str,
        categories: Vec<String>,
        k: usize,
        engine: &str,
    ) -> PyResult<Vec<Route>> {
        Ok(self
            .query_with_stats(source, target, categories, k, engine)?
            .0)
    }

    /// Like `query`, also returning the search counters as a dict.
    #[pyo3(signature = (source, target, categories, k, engine = "sk"))]
    fn query_with_stats(
        &self,
        source: &str,
        target: &str,
        categories: Vec<String>,
        k: usize,
        engine: &str,
    ) -> PyResult<(Vec<Route>, Py<PyDict>)> {
        let engine: Engine = engine.parse().map_err(to_py)?;
        let q = self
            .inner
            .named_query(source, target, &categories, k)
            .map_err(to_py)?;
        let out = self
            .inner
            .query(engine, &q, &QueryOptions::default())
            .map_err(to_py)?;
        let routes = out
            .witnesses
            .iter()
            .map(|w| (w.cost, self.names(&w.vertices)))
            .collect();
        Python::attach(|py| {
            let stats = PyDict::new(py);
            stats.set_item("examined_routes", out.stats.examined_routes)?;
            stats.set_item("extended_routes", out.stats.extended_routes)?;
            stats.set_item("nn_queries", out.stats.nn_queries)?;
            stats.set_item("runtime_s", out.stats.runtime.as_secs_f64())?;
            Ok((routes, stats.unbind()))
        })
    }

    /// Brute-force top-k, for cross-checking small instances.
    fn oracle(
        &self,
        source: &str,
        target: &str,
        categories: Vec<String>,
        k: usize,
    ) -> PyResult<Vec<Route>> {
        let q = self
            .inner
            .named_query(source, target, &categories, k)
            .map_err(to_py)?;
        let found = oracle_topk(
            &self.inner.graph,
            &self.inner.categories,
            q.source,
            q.target,
            &q.sequence,
            k,
        )
        .map_err(to_py)?;
        Ok(found
            .iter()
            .map(|w| (w.cost, self.names(&w.vertices)))
            .collect())
    }

    /// The `x`-th nearest member of `category` from `vertex`, as `(name, distance)`.
    fn find_nn(&self, vertex: &str, category: &str, x: usize) -> PyResult<Option<(String, u64)>> {
        if x == 0 {
            return Err(PyValueError::new_err("x starts at 1"));
        }
        let v = self.vertex(vertex)?;
        let c = self.inner.categories.resolve(category).map_err(to_py)?;
        let hit = self.inner.find_nn(v, c, x).map_err(to_py)?;
        Ok(hit.map(|(u, d)| (self.inner.names.name(u).to_string(), d)))
    }

    fn dist(&self, source: &str, target: &str) -> PyResult<Option<u64>> {
        Ok(self
            .inner
            .labels
            .dist(self.vertex(source)?, self.vertex(target)?))
    }

    /// Shortest path as vertex names, or None when unreachable.
    fn path(&self, source: &str, target: &str) -> PyResult<Option<Vec<String>>> {
        let p = self
            .inner
            .labels
            .reconstruct_path(self.vertex(source)?, self.vertex(target)?);
        Ok(p.map(|p| self.names(&p)))
    }

    fn add_vertex_category(&mut self, vertex: &str, category: &str) -> PyResult<bool> {
        let v = self.vertex(vertex)?;
        let c = self.inner.categories.resolve(category).map_err(to_py)?;
        self.inner.add_vertex_category(v, c).map_err(to_py)
    }

    fn remove_vertex_category(&mut self, vertex: &str, category: &str) -> PyResult<bool> {
        let v = self.vertex(vertex)?;
        let c = self.inner.categories.resolve(category).map_err(to_py)?;
        self.inner.remove_vertex_category(v, c).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "KosrIndex(vertices={}, categories={})",
            self.inner.graph.vertex_count(),
            self.inner.categories.category_count()
        )
    }
}

#[pymodule]
fn kosr_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyKosrIndex>()?;
    m.add(
        "ENGINES",
        Engine::ALL.iter().map(|e| e.name()).collect::<Vec<_>>(),
    )?;
    Ok(())
}
