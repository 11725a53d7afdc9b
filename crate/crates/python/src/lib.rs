//! Python bindings. Matrices cross the boundary as lists of lists of
//! `complex`; sites are 1-based as in model files.

use std::sync::Arc;

use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyNotImplementedError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use oqrw_tree_core::cli::model_file::ModelFile;
use oqrw_tree_core::cli::spec;
use oqrw_tree_core::entropy;
use oqrw_tree_core::model::random_model;
use oqrw_tree_core::phase::{self, PhaseConfig, TwoStateFamily};
use oqrw_tree_core::qmc::{self, BoundarySolution, QmcKernel, QmcState, SolverConfig};
use oqrw_tree_core::{ComplexMatrix, Error, OqrwModel, Tolerance, TwoStateParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Rows = Vec<Vec<Complex64>>;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::UnsupportedShape(_) | Error::UnsupportedBoundary(_) => PyNotImplementedError::new_err(e.to_string()),
        Error::Parse(_)
        | Error::Domain(_)
        | Error::InvalidModel(_)
        | Error::InvalidVertex { .. }
        | Error::IndexOutOfRange { .. }
        | Error::InvalidOrder
        | Error::DimensionMismatch { .. } => PyValueError::new_err(e.to_string()),
        _ => PyArithmeticError::new_err(e.to_string()),
    }
}

fn matrix(rows: Rows) -> PyResult<ComplexMatrix> {
    ComplexMatrix::from_rows(&rows).map_err(to_py)
}

fn sites(path: &[usize], l: usize) -> PyResult<Vec<usize>> {
    path.iter()
        .map(|&i| {
            if i == 0 || i > l {
                Err(PyValueError::new_err(format!("site {i} outside 1..={l}")))
            } else {
                Ok(i - 1)
            }
        })
        .collect()
}

#[pyclass(name = "Model", module = "oqrw_tree", frozen)]
struct PyModel {
    inner: OqrwModel,
}

#[pymethods]
impl PyModel {
    /// Explicit model from `B[i][j]` and `rho[i]` matrices.
    #[new]
    #[pyo3(signature = (b, rho, k = 2))]
    fn new(b: Vec<Vec<Rows>>, rho: Vec<Rows>, k: usize) -> PyResult<Self> {
        let b = b
            .into_iter()
            .map(|row| row.into_iter().map(matrix).collect::<PyResult<Vec<_>>>())
            .collect::<PyResult<Vec<_>>>()?;
        let rho = rho.into_iter().map(matrix).collect::<PyResult<Vec<_>>>()?;
        Ok(PyModel {
            inner: OqrwModel::new(k, b, rho).map_err(to_py)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (a, b, c, d, k = 2))]
    fn two_state(a: Complex64, b: Complex64, c: Complex64, d: Complex64, k: usize) -> PyResult<Self> {
        let params = TwoStateParams::with_pure_blocks(a, b, c, d);
        Ok(PyModel {
            inner: OqrwModel::two_state(&params, k).map_err(to_py)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (seed, lambda_size, dim_h, k = 2))]
    fn random(seed: u64, lambda_size: usize, dim_h: usize, k: usize) -> PyResult<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(PyModel {
            inner: random_model(&mut rng, lambda_size, dim_h, k).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let file = ModelFile::parse(text).map_err(to_py)?;
        Ok(PyModel {
            inner: file.to_model().map_err(to_py)?,
        })
    }

    fn to_json(&self) -> String {
        ModelFile::from_model(&self.inner).to_json()
    }

    #[getter]
    fn lambda_size(&self) -> usize {
        self.inner.lambda_size()
    }

    #[getter]
    fn dim_h(&self) -> usize {
        self.inner.dim_h()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    /// `B_j^i` for 1-based sites.
    fn block(&self, i: usize, j: usize) -> PyResult<Rows> {
        let s = sites(&[i, j], self.inner.lambda_size())?;
        Ok(self.inner.b(s[0], s[1]).rows())
    }

    /// Violation messages; empty when the model is valid.
    fn validate(&self) -> Vec<String> {
        self.inner
            .validate(&Tolerance::default())
            .violations
            .iter()
            .map(|v| v.to_string())
            .collect()
    }

    fn path_probability(&self, path: Vec<usize>) -> PyResult<f64> {
        let path = sites(&path, self.inner.lambda_size())?;
        self.inner.path_probability(&path).map_err(to_py)
    }

    fn sample_path(&self, steps: usize, seed: u64) -> Vec<usize> {
        self.inner.sample_path(steps, seed).into_iter().map(|i| i + 1).collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(lambda_size={}, dim_h={}, k={})",
            self.inner.lambda_size(),
            self.inner.dim_h(),
            self.inner.k()
        )
    }
}

#[pyclass(name = "Boundary", module = "oqrw_tree", frozen)]
struct PyBoundary {
    inner: BoundarySolution,
}

#[pymethods]
impl PyBoundary {
    #[getter]
    fn label(&self) -> Option<String> {
        self.inner.label.clone()
    }

    #[getter]
    fn h(&self) -> Rows {
        self.inner.h.rows()
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.inner.residual
    }

    fn is_diagonal(&self) -> bool {
        self.inner.is_diagonal()
    }

    fn __repr__(&self) -> String {
        format!(
            "Boundary(label={:?}, residual={:.3e})",
            self.inner.label.as_deref().unwrap_or("-"),
            self.inner.residual
        )
    }
}

fn kernel(model: &PyModel) -> PyResult<Arc<QmcKernel>> {
    Ok(Arc::new(QmcKernel::new(model.inner.clone(), Tolerance::default()).map_err(to_py)?))
}

#[pyfunction]
fn solve_boundaries(model: &PyModel) -> PyResult<Vec<PyBoundary>> {
    let kern = kernel(model)?;
    let set = qmc::solve_boundary_fixed_points(&kern, &SolverConfig::default()).map_err(to_py)?;
    Ok(set.solutions.into_iter().map(|inner| PyBoundary { inner }).collect())
}

#[pyfunction]
fn boundary_residual(model: &PyModel, h: Rows) -> PyResult<f64> {
    kernel(model)?.boundary_residual(&matrix(h)?).map_err(to_py)
}

/// `E(a_0, …, a_k)` for `k + 1` factors.
#[pyfunction]
fn transition_expectation(model: &PyModel, factors: Vec<Rows>) -> PyResult<Rows> {
    let factors = factors.into_iter().map(matrix).collect::<PyResult<Vec<_>>>()?;
    Ok(kernel(model)?.transition_expectation(&factors).map_err(to_py)?.rows())
}

#[pyfunction]
fn von_neumann_entropy(rho: Rows) -> PyResult<f64> {
    entropy::von_neumann_entropy(&matrix(rho)?, &Tolerance::default()).map_err(to_py)
}

/// A chain built from a boundary and a root density.
#[pyclass(name = "Chain", module = "oqrw_tree", frozen)]
struct PyChain {
    inner: QmcState,
}

#[pymethods]
impl PyChain {
    /// `boundary` is a label such as `"h_1"` or a `Boundary`; `omega` is
    /// `"canonical"`, `"mixed"` or an explicit matrix.
    #[new]
    #[pyo3(signature = (model, boundary, omega = None))]
    fn new(model: &PyModel, boundary: &Bound<'_, PyAny>, omega: Option<&Bound<'_, PyAny>>) -> PyResult<Self> {
        let kern = kernel(model)?;
        let sol = if let Ok(b) = boundary.extract::<PyRef<'_, PyBoundary>>() {
            b.inner.clone()
        } else {
            let label: String = boundary.extract()?;
            let sols = qmc::solve_boundary_fixed_points(&kern, &SolverConfig::default())
                .map_err(to_py)?
                .solutions;
            spec::select_boundary(&label, &kern, &sols).map_err(to_py)?
        };
        let omega = match omega {
            None => phase::canonical_omega(&kern, &sol),
            Some(w) => match w.extract::<String>() {
                Ok(name) => match spec::parse_omega(&name, &model.inner).map_err(to_py)? {
                    spec::OmegaSpec::Canonical => phase::canonical_omega(&kern, &sol),
                    spec::OmegaSpec::Mixed => {
                        let d = kern.dim();
                        ComplexMatrix::identity(d).scale(Complex64::new(1.0 / d as f64, 0.0))
                    }
                    spec::OmegaSpec::Explicit(m) => m,
                },
                Err(_) => matrix(w.extract()?)?,
            },
        };
        Ok(PyChain {
            inner: qmc::make_qmc(kern, omega, sol).map_err(to_py)?,
        })
    }

    /// Expectation of an observable given in the JSON term format.
    fn expect(&self, observable: &str) -> PyResult<Complex64> {
        let obs = spec::parse_observable(observable, self.inner.kernel().model()).map_err(to_py)?;
        self.inner.expectation(&obs).map_err(to_py)
    }

    /// `a` placed on every vertex of the ball of radius `n`.
    fn expect_uniform(&self, a: Rows, n: usize) -> PyResult<Complex64> {
        self.inner.expectation_uniform(&matrix(a)?, n).map_err(to_py)
    }

    #[getter]
    fn omega(&self) -> Rows {
        self.inner.omega().rows()
    }

    #[getter]
    fn normalization(&self) -> f64 {
        self.inner.normalization()
    }

    #[pyo3(signature = (n_max = 20, bits = false))]
    fn mean_entropy<'py>(&self, py: Python<'py>, n_max: usize, bits: bool) -> PyResult<Bound<'py, PyDict>> {
        let mut r = entropy::mean_entropy(&self.inner, n_max).map_err(to_py)?;
        if bits {
            r = r.in_bits();
        }
        let out = PyDict::new(py);
        out.set_item("site", r.site + 1)?;
        out.set_item("site_entropy", r.site_entropy)?;
        out.set_item("root_entropy", r.root_entropy)?;
        out.set_item("mean_entropy", r.mean_entropy)?;
        out.set_item("finite_values", r.finite_values)?;
        Ok(out)
    }
}

#[pyfunction]
fn gap_sequence(first: &PyChain, second: &PyChain, n_max: usize) -> PyResult<Vec<f64>> {
    phase::gap_sequence(&first.inner, &second.inner, n_max).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (model, n_max = 6, gap_threshold = 1e-6, delta = 0.01))]
fn detect_phase_transition<'py>(
    py: Python<'py>,
    model: &PyModel,
    n_max: usize,
    gap_threshold: f64,
    delta: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let config = PhaseConfig {
        n_max,
        gap_threshold,
        delta,
        ..PhaseConfig::default()
    };
    let r = phase::detect_phase_transition(&model.inner, &Tolerance::default(), &config).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("verdict", r.verdict.as_str())?;
    out.set_item("solutions", (0..r.solutions.len()).map(|i| r.label(i)).collect::<Vec<_>>())?;
    out.set_item("witness_pair", r.witness_pair.map(|(a, b)| (r.label(a), r.label(b))))?;
    out.set_item("canonical_gap", r.canonical_pair().map(|p| p.gap_limit))?;
    let pairs = r
        .pairs
        .iter()
        .map(|p| {
            let d = PyDict::new(py);
            d.set_item("first", r.label(p.first))?;
            d.set_item("second", r.label(p.second))?;
            d.set_item("gap_sequence", p.gap_sequence.clone())?;
            d.set_item("gap_limit", p.gap_limit)?;
            d.set_item("gap_verdict", p.gap_verdict.as_str())?;
            d.set_item("overlapping", p.overlapping)?;
            Ok(d)
        })
        .collect::<PyResult<Vec<_>>>()?;
    out.set_item("pairs", pairs)?;
    out.set_item("notes", r.notes)?;
    Ok(out)
}

/// Sweep of the two-state walk over `|c|` with fixed `b`, `d`.
#[pyfunction]
#[pyo3(signature = (grid, b = Complex64::new(0.6, 0.0), d = Complex64::new(0.8, 0.0), k = 2))]
fn parameter_sweep<'py>(
    py: Python<'py>,
    grid: Vec<f64>,
    b: Complex64,
    d: Complex64,
    k: usize,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let family = TwoStateFamily::new(b, d, k);
    let points = phase::parameter_sweep(&family, &grid, &Tolerance::default(), &PhaseConfig::default())
        .map_err(to_py)?;
    points
        .into_iter()
        .map(|p| {
            let out = PyDict::new(py);
            out.set_item("param", p.param)?;
            out.set_item("verdict", p.verdict.as_str())?;
            out.set_item("solution_count", p.solution_count)?;
            out.set_item("canonical_gap", p.canonical_gap)?;
            out.set_item("canonical_verdict", p.canonical_verdict.map(|v| v.as_str()))?;
            Ok(out)
        })
        .collect()
}

#[pymodule]
fn oqrw_tree(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PyBoundary>()?;
    m.add_class::<PyChain>()?;
    m.add_function(wrap_pyfunction!(solve_boundaries, m)?)?;
    m.add_function(wrap_pyfunction!(boundary_residual, m)?)?;
    m.add_function(wrap_pyfunction!(transition_expectation, m)?)?;
    m.add_function(wrap_pyfunction!(von_neumann_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(gap_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(detect_phase_transition, m)?)?;
    m.add_function(wrap_pyfunction!(parameter_sweep, m)?)?;
    Ok(())
}
