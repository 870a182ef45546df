//! Python bindings: matrices, the solver, distance estimates and the parameter ledger.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use smalleig::distspec;
use smalleig::driver::{self, EigenReport, GlobalData, SolveOptions};
use smalleig::hessenberg::hess_bu;
use smalleig::scalar::Mode;
use smalleig::verify;
use smalleig::{Complex64, ComplexMatrix, Error, HessenbergMatrix};

create_exception!(smalleig, SmallEigError, PyException);
create_exception!(smalleig, RetryBudgetExceeded, SmallEigError);
create_exception!(smalleig, PrecisionInsufficient, SmallEigError);

fn to_py(err: Error) -> PyErr {
    match err {
        Error::RetryBudgetExceeded { .. } => RetryBudgetExceeded::new_err(err.to_string()),
        Error::PrecisionInsufficient { .. } => PrecisionInsufficient::new_err(err.to_string()),
        _ => SmallEigError::new_err(err.to_string()),
    }
}

/// Dense complex square matrix.
#[pyclass(name = "Matrix", frozen, from_py_object)]
#[derive(Clone)]
struct PyMatrix {
    inner: ComplexMatrix,
}

#[pymethods]
impl PyMatrix {
    /// Build from a list of rows of numbers (complex, float or int).
    #[new]
    fn new(rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        Ok(Self { inner: ComplexMatrix::from_rows(&rows).map_err(to_py)? })
    }

    /// Parse the `{"n": .., "entries": [[re, im], ..]}` file format.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: ComplexMatrix::from_json_str(text).map_err(to_py)? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.inner.n()).map(|i| self.inner.row(i).to_vec()).collect()
    }

    /// Largest singular value.
    fn norm(&self) -> f64 {
        verify::largest_singular_value(&self.inner)
    }

    /// Unitarily similar upper Hessenberg form.
    fn hessenberg(&self) -> Self {
        Self { inner: hess_bu(&self.inner).h.into_matrix() }
    }

    fn is_hessenberg(&self) -> bool {
        self.inner.is_upper_hessenberg()
    }

    fn __repr__(&self) -> String {
        format!("Matrix(n={})", self.inner.n())
    }
}

#[derive(FromPyObject)]
enum MatrixArg {
    Wrapped(PyMatrix),
    Rows(Vec<Vec<Complex64>>),
}

impl MatrixArg {
    fn into_matrix(self) -> PyResult<ComplexMatrix> {
        match self {
            MatrixArg::Wrapped(m) => Ok(m.inner),
            MatrixArg::Rows(r) => ComplexMatrix::from_rows(&r).map_err(to_py),
        }
    }
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

/// Outcome of one run: eigenvalues plus everything needed to audit them.
#[pyclass(name = "Report", frozen)]
struct PyReport {
    inner: EigenReport,
}

#[pymethods]
impl PyReport {
    #[getter]
    fn eigenvalues(&self) -> Vec<Complex64> {
        self.inner.eigenvalues.clone()
    }

    #[getter]
    fn success(&self) -> bool {
        self.inner.success
    }

    #[getter]
    fn budget_used(&self) -> usize {
        self.inner.budget_used
    }

    #[getter]
    fn required_bits(&self) -> u64 {
        self.inner.required_bits
    }

    #[getter]
    fn error(&self) -> Option<String> {
        self.inner.error.clone()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_to_py(py, &self.inner.to_json())
    }

    /// Raise the matching exception if the run failed.
    fn raise_for_failure(&self) -> PyResult<()> {
        match &self.inner.failure {
            Some(e) => Err(to_py(e.clone())),
            None => Ok(()),
        }
    }

    fn __repr__(&self) -> String {
        format!("Report(n={}, success={})", self.inner.n, self.inner.success)
    }
}

fn options(mode: &str, m_cap: usize, precision_floor: bool) -> PyResult<SolveOptions> {
    let mode = match mode {
        "practical" => Mode::Practical,
        "theory" => Mode::Theory,
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    };
    Ok(SolveOptions { mode, m_cap, precision_floor, ..SolveOptions::default() })
}

/// Eigenvalues within `delta·‖M‖` (matching distance) with probability at least `1 − phi`.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (matrix, delta=0.05, phi=0.2, seed=0, mode="practical", m_cap=256, precision_floor=false))]
fn solve(
    py: Python<'_>,
    matrix: MatrixArg,
    delta: f64,
    phi: f64,
    seed: u64,
    mode: &str,
    m_cap: usize,
    precision_floor: bool,
) -> PyResult<PyReport> {
    let m = matrix.into_matrix()?;
    let opts = options(mode, m_cap, precision_floor)?;
    let inner = py.detach(|| driver::solve(&m, delta, phi, seed, &opts));
    Ok(PyReport { inner })
}

/// Backward error `beta` turned into a forward guarantee.
#[pyfunction]
#[pyo3(signature = (matrix, beta, phi=0.2, seed=0))]
fn forward_eig(py: Python<'_>, matrix: MatrixArg, beta: f64, phi: f64, seed: u64) -> PyResult<PyReport> {
    let m = matrix.into_matrix()?;
    let inner = py.detach(|| driver::forward_eig(&m, beta, phi, seed, &SolveOptions::default()));
    Ok(PyReport { inner })
}

/// Estimate of the distance from `s` to the spectrum; accurate to a factor `1 ± O(log n / m)`.
#[pyfunction]
fn dist_spec(matrix: MatrixArg, s: Complex64, m: usize) -> PyResult<f64> {
    let a = matrix.into_matrix()?;
    let h = match HessenbergMatrix::new(a.clone()) {
        Ok(h) => h,
        Err(_) => hess_bu(&a).h,
    };
    Ok(distspec::dist_spec(&h, s, m).map_err(to_py)?.tau)
}

/// Reference eigenvalues from the high-precision oracle.
#[pyfunction]
fn oracle_eigenvalues(matrix: MatrixArg) -> PyResult<Vec<Complex64>> {
    verify::oracle_eigenvalues(&matrix.into_matrix()?).map_err(to_py)
}

#[pyfunction]
fn matching_distance(a: Vec<Complex64>, b: Vec<Complex64>) -> PyResult<f64> {
    verify::matching_distance(&a, &b).map_err(to_py)
}

/// `(re, im, sigma_min)` over a rectangle.
#[pyfunction]
fn pseudospectrum_grid(matrix: MatrixArg, re: (f64, f64), im: (f64, f64), step: f64) -> PyResult<Vec<(f64, f64, f64)>> {
    let pts = verify::pseudospectrum_grid(&matrix.into_matrix()?, re, im, step).map_err(to_py)?;
    Ok(pts.into_iter().map(|p| (p.z.re, p.z.im, p.sigma_min)).collect())
}

fn global(n: usize, sigma: f64, eps: f64, zeta: f64) -> GlobalData {
    GlobalData { n, sigma, eps, zeta }
}

#[pyfunction]
fn compute_parameters<'py>(
    py: Python<'py>,
    delta: f64,
    phi: f64,
    n: usize,
    sigma: f64,
    eps: f64,
    zeta: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let l = driver::compute_parameters(delta, phi, &global(n, sigma, eps, zeta)).map_err(to_py)?;
    json_to_py(py, &serde_json::to_string(&l).map_err(|e| SmallEigError::new_err(e.to_string()))?)
}

/// Bits of precision the worst-case analysis asks for.
#[pyfunction]
fn required_precision(delta: f64, phi: f64, n: usize, sigma: f64, eps: f64, zeta: f64) -> PyResult<u64> {
    let g = global(n, sigma, eps, zeta);
    let l = driver::compute_parameters(delta, phi, &g).map_err(to_py)?;
    Ok(driver::required_precision(&l, &g).bits)
}

/// `(eps, zeta)` for a Ginibre perturbation of width `gamma`.
#[pyfunction]
fn shattering_parameters(norm: f64, gamma: f64, phi: f64, n: usize) -> PyResult<(f64, f64)> {
    driver::shattering_parameters(norm, gamma, phi, n).map_err(to_py)
}

#[pymodule(name = "smalleig")]
fn smalleig_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("SmallEigError", py.get_type::<SmallEigError>())?;
    m.add("RetryBudgetExceeded", py.get_type::<RetryBudgetExceeded>())?;
    m.add("PrecisionInsufficient", py.get_type::<PrecisionInsufficient>())?;
    m.add_class::<PyMatrix>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(forward_eig, m)?)?;
    m.add_function(wrap_pyfunction!(dist_spec, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(matching_distance, m)?)?;
    m.add_function(wrap_pyfunction!(pseudospectrum_grid, m)?)?;
    m.add_function(wrap_pyfunction!(compute_parameters, m)?)?;
    m.add_function(wrap_pyfunction!(required_precision, m)?)?;
    m.add_function(wrap_pyfunction!(shattering_parameters, m)?)?;
    Ok(())
}
