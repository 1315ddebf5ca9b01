//! Python bindings. Reports come back as plain dicts and lists.

use ::bergbox::cli::{execute, Command, JobSpec};
use ::bergbox::lattice::{complement_cover, prune_cover, LatticeBox, LatticeRegion, MultiIndex};
use ::bergbox::operators::{
    commutator_entries, essential_normality_scan, schatten_scan, SchattenOptions,
};
use ::bergbox::report::to_json;
use ::bergbox::resolution::{
    build_resolution, euler_indicator, psi_norm, verify_chain_complex_with,
    verify_exactness_pointwise_with, verify_module_map_with, VerifyOptions,
};
use ::bergbox::weights::{isometry_residuals, oracle_norm, EggDomainSpec, WeightFunction};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: ::bergbox::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize + ?Sized>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (to_json(value),))
}

/// `(source, target, value)` rows of a commutator table.
type EntryRows = Vec<(Vec<u32>, Vec<u32>, f64)>;

fn index(n: Vec<u32>) -> MultiIndex {
    MultiIndex::new(n)
}

/// Nested egg domain.
#[pyclass(name = "EggDomain", module = "bergbox", frozen)]
struct PyEggDomain {
    inner: EggDomainSpec,
}

#[pymethods]
impl PyEggDomain {
    /// Plain egg `sum |z_j|^(2 p_j) < 1`.
    #[staticmethod]
    fn egg(p: Vec<f64>) -> PyResult<Self> {
        EggDomainSpec::egg(&p).map(|inner| PyEggDomain { inner }).map_err(err)
    }

    #[staticmethod]
    fn ball(m: usize) -> Self {
        PyEggDomain {
            inner: EggDomainSpec::ball(m),
        }
    }

    /// Same JSON shape as the `domain` field of a job spec.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text)
            .map(|inner| PyEggDomain { inner })
            .map_err(|e| PyValueError::new_err(format!("domain: {e}")))
    }

    fn to_json(&self) -> String {
        to_json(&self.inner)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn depth(&self) -> usize {
        self.inner.depth()
    }

    fn coordinate_names(&self) -> Vec<String> {
        self.inner.coordinate_names().into_iter().map(String::from).collect()
    }

    fn __repr__(&self) -> String {
        format!("EggDomain(dim={}, depth={})", self.inner.dim(), self.inner.depth())
    }
}

/// Monomial norms of `rho^s dV` on a domain, with a memo.
#[pyclass(name = "WeightFunction", module = "bergbox", frozen)]
struct PyWeightFunction {
    inner: WeightFunction,
}

#[pymethods]
impl PyWeightFunction {
    #[new]
    #[pyo3(signature = (domain, s = 0.0))]
    fn new(domain: &PyEggDomain, s: f64) -> PyResult<Self> {
        WeightFunction::new(domain.inner.clone(), s)
            .map(|inner| PyWeightFunction { inner })
            .map_err(err)
    }

    #[getter]
    fn s(&self) -> f64 {
        self.inner.s()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn omega(&self, alpha: Vec<u32>) -> PyResult<f64> {
        self.inner.omega(&index(alpha)).map_err(err)
    }

    fn log_omega(&self, alpha: Vec<u32>) -> PyResult<f64> {
        self.inner.log_omega(&index(alpha)).map_err(err)
    }
}

/// Monomial ideal given by exponent vectors of its generators.
#[pyclass(name = "MonomialIdeal", module = "bergbox", frozen)]
struct PyMonomialIdeal {
    inner: ::bergbox::lattice::MonomialIdeal,
}

fn box_limits(b: &LatticeBox) -> Vec<Option<u32>> {
    b.limits().to_vec()
}

#[pymethods]
impl PyMonomialIdeal {
    #[new]
    fn new(dim: usize, generators: Vec<Vec<u32>>) -> PyResult<Self> {
        ::bergbox::lattice::MonomialIdeal::from_exponents(dim, &generators)
            .map(|inner| PyMonomialIdeal { inner })
            .map_err(err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn generators(&self) -> Vec<Vec<u32>> {
        self.inner.generators().iter().map(|g| g.as_slice().to_vec()).collect()
    }

    fn minimized(&self) -> Self {
        PyMonomialIdeal {
            inner: self.inner.minimized(),
        }
    }

    fn contains(&self, n: Vec<u32>) -> PyResult<bool> {
        self.inner.contains(&index(n)).map_err(err)
    }

    /// Boxes covering the complement; each box is a list of per-coordinate
    /// upper bounds, `None` for unconstrained.
    #[pyo3(signature = (pruned = false))]
    fn complement_cover(&self, pruned: bool) -> Vec<Vec<Option<u32>>> {
        let raw = complement_cover(&self.inner);
        let cover = if pruned { prune_cover(&raw) } else { raw };
        cover.boxes().iter().map(box_limits).collect()
    }

    fn __repr__(&self) -> String {
        format!("MonomialIdeal(dim={}, generators={:?})", self.inner.dim(), self.generators())
    }
}

/// Box resolution of the complement of an ideal.
#[pyclass(name = "Resolution", module = "bergbox", frozen)]
struct PyResolution {
    ideal: ::bergbox::lattice::MonomialIdeal,
    inner: ::bergbox::resolution::Resolution,
}

fn verify_options(label_budget: Option<usize>) -> VerifyOptions {
    let mut o = VerifyOptions::default();
    if let Some(b) = label_budget {
        o.label_budget = b;
    }
    o
}

#[pymethods]
impl PyResolution {
    #[new]
    #[pyo3(signature = (ideal, pruned = true))]
    fn new(ideal: &PyMonomialIdeal, pruned: bool) -> PyResult<Self> {
        let ideal = ideal.inner.minimized();
        let raw = complement_cover(&ideal);
        let cover = if pruned { prune_cover(&raw) } else { raw };
        let inner = build_resolution(cover).map_err(err)?;
        Ok(PyResolution { ideal, inner })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn boxes(&self) -> Vec<Vec<Option<u32>>> {
        self.inner.cover().boxes().iter().map(box_limits).collect()
    }

    /// 0-based labels of the boxes containing `n`.
    fn labels_at(&self, n: Vec<u32>) -> PyResult<Vec<usize>> {
        self.inner.labels_at(&index(n)).map_err(err)
    }

    fn euler_indicator(&self, n: Vec<u32>) -> PyResult<i64> {
        euler_indicator(&self.inner, &index(n)).map_err(err)
    }

    #[pyo3(signature = (cap, label_budget = None))]
    fn verify_chain_complex<'py>(
        &self,
        py: Python<'py>,
        cap: u32,
        label_budget: Option<usize>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let r = verify_chain_complex_with(&self.inner, cap, &verify_options(label_budget)).map_err(err)?;
        to_py(py, &r)
    }

    #[pyo3(signature = (cap, label_budget = None))]
    fn verify_exactness<'py>(
        &self,
        py: Python<'py>,
        cap: u32,
        label_budget: Option<usize>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let opts = verify_options(label_budget);
        let r = verify_exactness_pointwise_with(&self.inner, &self.ideal, cap, &opts).map_err(err)?;
        to_py(py, &r)
    }

    fn verify_module_map<'py>(
        &self,
        py: Python<'py>,
        weights: &PyWeightFunction,
        q: usize,
        cap: u32,
    ) -> PyResult<Bound<'py, PyAny>> {
        let r = verify_module_map_with(&self.inner, &weights.inner, q, cap, &VerifyOptions::default())
            .map_err(err)?;
        to_py(py, &r)
    }

    fn psi_norm<'py>(&self, py: Python<'py>, q: usize, cap: u32) -> PyResult<Bound<'py, PyAny>> {
        let r = psi_norm(&self.inner, q, cap, &VerifyOptions::default()).map_err(err)?;
        to_py(py, &r)
    }
}

fn region_of(dim: usize, ideal: Option<&PyMonomialIdeal>) -> PyResult<LatticeRegion> {
    match ideal {
        None => Ok(LatticeRegion::full(dim)),
        Some(i) if i.inner.dim() == dim => Ok(LatticeRegion::complement_of(i.inner.clone())),
        Some(i) => Err(PyValueError::new_err(format!(
            "ideal has dimension {}, weights have {dim}",
            i.inner.dim()
        ))),
    }
}

/// Closed-form norm `||z^alpha||^2` in `L^2(rho^s dV)`.
#[pyfunction]
#[pyo3(signature = (domain, alpha, s = 0.0))]
fn omega(domain: &PyEggDomain, alpha: Vec<u32>, s: f64) -> PyResult<f64> {
    ::bergbox::weights::omega(&domain.inner, s, &index(alpha)).map_err(err)
}

/// Monte Carlo estimate; returns `(estimate, standard_error)`.
#[pyfunction]
#[pyo3(signature = (domain, alpha, s = 0.0, samples = 1_000_000, seed = 0))]
fn monte_carlo_norm(
    domain: &PyEggDomain,
    alpha: Vec<u32>,
    s: f64,
    samples: u64,
    seed: u64,
) -> PyResult<(f64, f64)> {
    let e = oracle_norm(&domain.inner, s, &index(alpha), samples, seed).map_err(err)?;
    Ok((e.estimate, e.standard_error))
}

#[pyfunction]
fn isometry_report<'py>(py: Python<'py>, domain: &PyEggDomain, cap: u32) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &isometry_residuals(&domain.inner, cap).map_err(err)?)
}

/// Nonzero entries of `[T_i, T_k^*]` on the complement of `ideal` (or the
/// full lattice) as `(source, target, value)`, coordinates 0-based.
#[pyfunction]
#[pyo3(signature = (weights, i, k, cap, ideal = None))]
fn commutators(
    weights: &PyWeightFunction,
    i: usize,
    k: usize,
    cap: u32,
    ideal: Option<&PyMonomialIdeal>,
) -> PyResult<EntryRows> {
    let region = region_of(weights.inner.dim(), ideal)?;
    let table = commutator_entries(i, k, &region, &weights.inner, cap).map_err(err)?;
    Ok(table
        .entries
        .into_iter()
        .map(|e| (e.source.as_slice().to_vec(), e.target.as_slice().to_vec(), e.value))
        .collect())
}

/// Shell suprema and decay fit of all commutators.
#[pyfunction]
#[pyo3(signature = (weights, cap, ideal = None))]
fn decay_scan<'py>(
    py: Python<'py>,
    weights: &PyWeightFunction,
    cap: u32,
    ideal: Option<&PyMonomialIdeal>,
) -> PyResult<Bound<'py, PyAny>> {
    let region = region_of(weights.inner.dim(), ideal)?;
    let mut r = essential_normality_scan(&region, &weights.inner, cap).map_err(err)?;
    for p in &mut r.pairs {
        p.entries.clear();
    }
    to_py(py, &(r.shell_sup, r.decay))
}

/// Critical Schatten exponent estimate over `p_grid`.
#[pyfunction]
#[pyo3(signature = (weights, p_grid, cap, ideal = None, diagonal_only = false))]
fn schatten_critical<'py>(
    py: Python<'py>,
    weights: &PyWeightFunction,
    p_grid: Vec<f64>,
    cap: u32,
    ideal: Option<&PyMonomialIdeal>,
    diagonal_only: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let region = region_of(weights.inner.dim(), ideal)?;
    let opts = SchattenOptions {
        diagonal_only,
        ..Default::default()
    };
    let r = schatten_scan(&region, &weights.inner, &p_grid, cap, &opts).map_err(err)?;
    to_py(py, &r.critical)
}

/// Runs a CLI command on a JSON job spec; returns `(summary, verified)`.
#[pyfunction]
fn run_job<'py>(py: Python<'py>, command: &str, spec: &str) -> PyResult<(Bound<'py, PyAny>, bool)> {
    let command = match command {
        "weights" => Command::Weights,
        "decompose" => Command::Decompose,
        "commutators" => Command::Commutators,
        "schatten" => Command::Schatten,
        "resolution" => Command::Resolution,
        "isometry" => Command::Isometry,
        "oracle" => Command::Oracle,
        other => return Err(PyValueError::new_err(format!("unknown command {other:?}"))),
    };
    let spec = JobSpec::from_json(spec).map_err(err)?;
    let out = py.detach(|| execute(command, &spec)).map_err(err)?;
    let summary = py.import("json")?.call_method1("loads", (out.summary,))?;
    Ok((summary, out.verified))
}

#[pymodule]
#[pyo3(name = "bergbox")]
fn bergbox_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyEggDomain>()?;
    m.add_class::<PyWeightFunction>()?;
    m.add_class::<PyMonomialIdeal>()?;
    m.add_class::<PyResolution>()?;
    m.add_function(wrap_pyfunction!(omega, m)?)?;
    m.add_function(wrap_pyfunction!(monte_carlo_norm, m)?)?;
    m.add_function(wrap_pyfunction!(isometry_report, m)?)?;
    m.add_function(wrap_pyfunction!(commutators, m)?)?;
    m.add_function(wrap_pyfunction!(decay_scan, m)?)?;
    m.add_function(wrap_pyfunction!(schatten_critical, m)?)?;
    m.add_function(wrap_pyfunction!(run_job, m)?)?;
    Ok(())
}
