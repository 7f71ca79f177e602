//! Python bindings: `import qpec_py`.

use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qpec::combinatorics::{intersection_law, intersection_law_containing};
use qpec::pm_models::{sumset_bounds as core_sumset_bounds, ExactBudget, DEFAULT_ENUMERATION_CAP};
use qpec::sim::CodeSource;
use qpec::symset::{intersect as core_intersect, sumset as core_sumset};
use qpec::{DegreeDistribution, PmKind};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_set(q: usize, values: &[usize]) -> PyResult<qpec::SymbolSet> {
    qpec::SymbolSet::from_values(q, values.iter().copied()).map_err(value_err)
}

fn from_set(s: &qpec::SymbolSet) -> Vec<usize> {
    s.values().collect()
}

/// Finite field GF(q) for prime powers q <= 256.
#[pyclass(frozen, module = "qpec_py")]
struct Field {
    inner: Arc<qpec::Field>,
}

#[pymethods]
impl Field {
    #[new]
    fn new(q: usize) -> PyResult<Self> {
        Ok(Field {
            inner: Arc::new(qpec::Field::new(q).map_err(value_err)?),
        })
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    #[getter]
    fn characteristic(&self) -> usize {
        self.inner.characteristic()
    }

    fn add(&self, a: usize, b: usize) -> PyResult<usize> {
        let f = &self.inner;
        Ok(f.add(f.element(a).map_err(value_err)?, f.element(b).map_err(value_err)?).value())
    }

    fn mul(&self, a: usize, b: usize) -> PyResult<usize> {
        let f = &self.inner;
        Ok(f.mul(f.element(a).map_err(value_err)?, f.element(b).map_err(value_err)?).value())
    }

    fn inv(&self, a: usize) -> PyResult<usize> {
        let f = &self.inner;
        Ok(f.inv(f.element(a).map_err(value_err)?).map_err(value_err)?.value())
    }

    /// Sumset of the given sets, each a list of field elements.
    fn sumset(&self, sets: Vec<Vec<usize>>) -> PyResult<Vec<usize>> {
        let q = self.inner.order();
        let sets = sets.iter().map(|s| to_set(q, s)).collect::<PyResult<Vec<_>>>()?;
        Ok(from_set(&core_sumset(&self.inner, &sets).map_err(value_err)?))
    }

    fn intersect(&self, sets: Vec<Vec<usize>>) -> PyResult<Vec<usize>> {
        let q = self.inner.order();
        let sets = sets.iter().map(|s| to_set(q, s)).collect::<PyResult<Vec<_>>>()?;
        Ok(from_set(&core_intersect(&sets).map_err(value_err)?))
    }

    /// `(lower, upper, q_condition)` bounds on the size of a sumset.
    fn sumset_bounds(&self, sizes: Vec<usize>) -> PyResult<(usize, usize, bool)> {
        let b = core_sumset_bounds(&sizes, &self.inner).map_err(value_err)?;
        Ok((b.lower, b.upper, b.q_condition))
    }

    fn __repr__(&self) -> String {
        format!("Field({})", self.inner.order())
    }
}

/// q-ary partial erasure channel.
#[pyclass(frozen, module = "qpec_py")]
struct Channel {
    inner: qpec::Channel,
}

#[pymethods]
impl Channel {
    #[new]
    fn new(q: usize, m: usize, epsilon: f64) -> PyResult<Self> {
        let field = Arc::new(qpec::Field::new(q).map_err(value_err)?);
        Ok(Channel {
            inner: qpec::Channel::new(field, m, epsilon).map_err(value_err)?,
        })
    }

    fn capacity(&self) -> f64 {
        self.inner.capacity()
    }

    fn capacity_bits(&self) -> f64 {
        self.inner.capacity_bits()
    }

    /// Transmits `x` `count` times and returns the observed sets.
    #[pyo3(signature = (x, count, seed = 0))]
    fn transmit(&self, x: usize, count: usize, seed: u64) -> PyResult<Vec<Vec<usize>>> {
        let x = self.inner.field().element(x).map_err(value_err)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..count).map(|_| from_set(&self.inner.transmit(x, &mut rng).observed)).collect())
    }
}

/// `[T_0, ..., T_mu]` for uniformly random subsets of the given sizes.
#[pyfunction]
fn intersection_probs(q: usize, sizes: Vec<usize>) -> PyResult<Vec<f64>> {
    let t = qpec::SizeTuple::new(sizes, q).map_err(value_err)?;
    Ok(intersection_law(&t))
}

/// `[Q_1, ..., Q_mu]`: intersection law when every subset contains a fixed element.
#[pyfunction]
fn intersection_probs_containing(q: usize, sizes: Vec<usize>) -> PyResult<Vec<f64>> {
    let t = qpec::SizeTuple::new(sizes, q).map_err(value_err)?;
    intersection_law_containing(&t).map_err(value_err)
}

fn pm_model(q: usize, model: &str, mc_samples: Option<usize>, seed: u64) -> PyResult<Arc<qpec::PmModel>> {
    let kind: PmKind = model.parse().map_err(value_err)?;
    let field = Arc::new(qpec::Field::new(q).map_err(value_err)?);
    let budget = match mc_samples {
        Some(samples) => ExactBudget::Fallback {
            cap: DEFAULT_ENUMERATION_CAP,
            samples,
            seed,
        },
        None => ExactBudget::Exhaustive {
            cap: DEFAULT_ENUMERATION_CAP,
        },
    };
    Ok(Arc::new(qpec::PmModel::with_budget(kind, field, budget)))
}

/// Sumset-size law `[P_1, ..., P_q]` under the named model.
#[pyfunction]
#[pyo3(signature = (q, sizes, model = "exact", mc_samples = None, seed = 0))]
fn pm_distribution(q: usize, sizes: Vec<usize>, model: &str, mc_samples: Option<usize>, seed: u64) -> PyResult<Vec<f64>> {
    let pm = pm_model(q, model, mc_samples, seed)?;
    Ok(pm.distribution(&sizes).map_err(value_err)?.probs().to_vec())
}

fn de_config(q: usize, m: usize, eps: f64, dv: usize, dc: usize, model: &str) -> PyResult<qpec::DeConfig> {
    let pm = pm_model(q, model, None, 0)?;
    let channel = qpec::Channel::new(pm.field().clone(), m, eps).map_err(value_err)?;
    let degrees = DegreeDistribution::regular(dv, dc).map_err(value_err)?;
    Ok(qpec::DeConfig::new(channel, degrees, pm))
}

/// Density evolution at fixed epsilon: `(converged, [failure probability per iteration])`.
#[pyfunction]
#[pyo3(signature = (q, m, eps, dv = 3, dc = 6, model = "exact", max_iters = 2000))]
fn de_run(q: usize, m: usize, eps: f64, dv: usize, dc: usize, model: &str, max_iters: usize) -> PyResult<(bool, Vec<f64>)> {
    let mut cfg = de_config(q, m, eps, dv, dc, model)?;
    cfg.max_iters = max_iters;
    let run = qpec::de_run(&cfg).map_err(value_err)?;
    Ok((run.converged, run.trajectory.iter().map(|&(_, p)| p).collect()))
}

/// Density-evolution decoding threshold in epsilon.
#[pyfunction]
#[pyo3(signature = (q, m, dv = 3, dc = 6, model = "exact", tol = 1e-4))]
fn threshold(py: Python<'_>, q: usize, m: usize, dv: usize, dc: usize, model: &str, tol: f64) -> PyResult<f64> {
    let cfg = de_config(q, m, 0.5, dv, dc, model)?;
    py.detach(|| qpec::threshold_search(&cfg, tol)).map_err(value_err)
}

/// Decodes `received` (one candidate list per variable) on a graph in the
/// text format. Returns `(success, iterations, posterior sets)`.
#[pyfunction]
#[pyo3(signature = (graph_text, received, max_iters = 100))]
fn decode(graph_text: &str, received: Vec<Vec<usize>>, max_iters: usize) -> PyResult<(bool, usize, Vec<Vec<usize>>)> {
    let q: usize = graph_text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .and_then(|l| l.split_whitespace().next())
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| PyValueError::new_err("graph text is missing its \"q n m\" header"))?;
    let field = qpec::Field::new(q).map_err(value_err)?;
    let graph = qpec::TannerGraph::from_text(&field, graph_text).map_err(value_err)?;
    let received = received.iter().map(|s| to_set(q, s)).collect::<PyResult<Vec<_>>>()?;
    let out = qpec::decode(&graph, &field, &received, max_iters).map_err(value_err)?;
    Ok((
        out.status == qpec::DecodeStatus::Success,
        out.iterations,
        out.estimate.iter().map(from_set).collect(),
    ))
}

/// Random `(dv, dc)`-regular Tanner graph in the text format.
#[pyfunction]
#[pyo3(signature = (q, n, dv = 3, dc = 6, seed = 0))]
fn regular_graph(q: usize, n: usize, dv: usize, dc: usize, seed: u64) -> PyResult<String> {
    let field = qpec::Field::new(q).map_err(value_err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(qpec::build_regular(n, dv, dc, &field, &mut rng).map_err(value_err)?.to_text())
}

/// Monte Carlo over the regular ensemble; returns a dict of report fields.
#[pyfunction]
#[pyo3(signature = (q, m, eps, n, trials, dv = 3, dc = 6, max_iters = 200, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    py: Python<'_>,
    q: usize,
    m: usize,
    eps: f64,
    n: usize,
    trials: u64,
    dv: usize,
    dc: usize,
    max_iters: usize,
    seed: u64,
) -> PyResult<Py<pyo3::types::PyDict>> {
    let field = Arc::new(qpec::Field::new(q).map_err(value_err)?);
    let ch = qpec::Channel::new(field, m, eps).map_err(value_err)?;
    let r = py
        .detach(|| qpec::run_trials(CodeSource::Ensemble { n, dv, dc }, &ch, trials, max_iters, seed))
        .map_err(value_err)?;
    let d = pyo3::types::PyDict::new(py);
    d.set_item("trials", r.trials)?;
    d.set_item("successes", r.successes)?;
    d.set_item("success_rate", r.success_rate())?;
    d.set_item("avg_iterations", r.avg_iterations)?;
    d.set_item("residual_symbol_error_rate", r.residual_symbol_error_rate)?;
    Ok(d.unbind())
}

#[pymodule]
fn qpec_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Field>()?;
    m.add_class::<Channel>()?;
    m.add_function(wrap_pyfunction!(intersection_probs, m)?)?;
    m.add_function(wrap_pyfunction!(intersection_probs_containing, m)?)?;
    m.add_function(wrap_pyfunction!(pm_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(de_run, m)?)?;
    m.add_function(wrap_pyfunction!(threshold, m)?)?;
    m.add_function(wrap_pyfunction!(decode, m)?)?;
    m.add_function(wrap_pyfunction!(regular_graph, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
