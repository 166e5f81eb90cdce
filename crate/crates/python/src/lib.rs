//! Python bindings: a dense tensor type, the inequality checkers and the suite runner.
//!
//! Reports and suite results cross the boundary as plain dicts.

use num_complex::Complex64;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;
use tracegym_core::inequalities as ineq;
use tracegym_core::quadrature::{build_quadrature, QuadratureScheme, DEFAULT_MAX_NODES};
use tracegym_core::spectral::{eig_hermitian, exp_hermitian, log_positive, real_power, Eigh};
use tracegym_core::suite::{run_suite as run_suite_core, SuiteConfig};
use tracegym_core::{DenseTensor, Error, Shape};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Shape(_) | Error::NotHermitian(_) | Error::Domain(_) | Error::Parse(_) => {
            PyValueError::new_err(e.to_string())
        }
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| py_err(e.into()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn rho(theta: f64, budget: f64) -> PyResult<QuadratureScheme> {
    build_quadrature(theta, budget, DEFAULT_MAX_NODES).map_err(py_err)
}

fn unwrap_all(ts: Vec<PyRef<'_, Tensor>>) -> Vec<DenseTensor> {
    ts.iter().map(|t| t.inner.clone()).collect()
}

/// Dense complex tensor with row multi-index dims and column multi-index dims.
#[pyclass(module = "tracegym", frozen)]
struct Tensor {
    inner: DenseTensor,
}

#[pymethods]
impl Tensor {
    /// Build from row-major real and (optional) imaginary parts.
    #[new]
    #[pyo3(signature = (row_dims, col_dims, re, im=None))]
    fn new(row_dims: Vec<usize>, col_dims: Vec<usize>, re: Vec<f64>, im: Option<Vec<f64>>) -> PyResult<Self> {
        let shape = Shape::new(row_dims, col_dims).map_err(py_err)?;
        let im = im.unwrap_or_else(|| vec![0.0; re.len()]);
        Ok(Self { inner: DenseTensor::from_parts(shape, &re, &im).map_err(py_err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = serde_json::from_str(text).map_err(|e| py_err(e.into()))?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn identity(dims: Vec<usize>) -> PyResult<Self> {
        let shape = Shape::square(&dims).map_err(py_err)?;
        Ok(Self { inner: tracegym_core::tensor::identity_tensor(&shape).map_err(py_err)? })
    }

    #[staticmethod]
    fn diagonal(dims: Vec<usize>, values: Vec<f64>) -> PyResult<Self> {
        let shape = Shape::square(&dims).map_err(py_err)?;
        Ok(Self { inner: DenseTensor::diagonal(shape, &values).map_err(py_err)? })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| py_err(e.into()))
    }

    #[getter]
    fn row_dims(&self) -> Vec<usize> {
        self.inner.shape().row_dims().to_vec()
    }

    #[getter]
    fn col_dims(&self) -> Vec<usize> {
        self.inner.shape().col_dims().to_vec()
    }

    /// Row-major entries of the matricized view.
    fn entries(&self) -> Vec<Complex64> {
        self.inner.entries().to_vec()
    }

    fn einstein(&self, other: &Tensor) -> PyResult<Tensor> {
        Ok(Tensor { inner: self.inner.einstein_product(&other.inner).map_err(py_err)? })
    }

    fn __matmul__(&self, other: &Tensor) -> PyResult<Tensor> {
        self.einstein(other)
    }

    fn __add__(&self, other: &Tensor) -> PyResult<Tensor> {
        Ok(Tensor { inner: self.inner.add(&other.inner).map_err(py_err)? })
    }

    fn kron(&self, other: &Tensor) -> Tensor {
        Tensor { inner: self.inner.kronecker_product(&other.inner) }
    }

    fn adjoint(&self) -> Tensor {
        Tensor { inner: self.inner.conj_transpose() }
    }

    fn trace(&self) -> PyResult<Complex64> {
        self.inner.trace().map_err(py_err)
    }

    fn frobenius_norm(&self) -> f64 {
        self.inner.frobenius_norm()
    }

    #[pyo3(signature = (rel_tol=1e-12))]
    fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.inner.is_hermitian(rel_tol)
    }

    /// Eigenvalues with multiplicity, ascending.
    fn eigenvalues(&self) -> PyResult<Vec<f64>> {
        Ok(Eigh::new(&self.inner).map_err(py_err)?.values().to_vec())
    }

    fn exp(&self) -> PyResult<Tensor> {
        Ok(Tensor { inner: exp_hermitian(&self.inner).map_err(py_err)? })
    }

    fn log(&self) -> PyResult<Tensor> {
        Ok(Tensor { inner: log_positive(&self.inner).map_err(py_err)? })
    }

    fn power(&self, alpha: f64) -> PyResult<Tensor> {
        Ok(Tensor { inner: real_power(&self.inner, alpha).map_err(py_err)? })
    }

    fn pinch(&self, x: &Tensor) -> PyResult<Tensor> {
        let dec = eig_hermitian(&self.inner, None).map_err(py_err)?;
        Ok(Tensor { inner: tracegym_core::pinching::pinch(&dec, &x.inner).map_err(py_err)? })
    }

    fn __repr__(&self) -> String {
        format!("Tensor({})", self.inner.shape())
    }
}

/// `Tr e^{H1 + H2} <= Tr e^{H1} e^{H2}`.
#[pyfunction]
fn check_gt_two<'py>(py: Python<'py>, h1: &Tensor, h2: &Tensor) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &ineq::check_gt_two(&h1.inner, &h2.inner).map_err(py_err)?)
}

#[pyfunction]
#[pyo3(signature = (a1, a2, r, q=1.0))]
fn check_alt_two<'py>(py: Python<'py>, a1: &Tensor, a2: &Tensor, r: f64, q: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &ineq::check_alt_two(&a1.inner, &a2.inner, r, q).map_err(py_err)?)
}

#[pyfunction]
#[pyo3(signature = (tensors, theta, p, quad_budget=1e-6))]
fn check_alt_multi<'py>(
    py: Python<'py>,
    tensors: Vec<PyRef<'py, Tensor>>,
    theta: f64,
    p: f64,
    quad_budget: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let t = unwrap_all(tensors);
    let quad = rho(theta, quad_budget)?;
    to_py(py, &ineq::check_alt_multi(&t, theta, p, &quad).map_err(py_err)?)
}

#[pyfunction]
#[pyo3(signature = (tensors, p, quad_budget=1e-6))]
fn check_gt_multi<'py>(
    py: Python<'py>,
    tensors: Vec<PyRef<'py, Tensor>>,
    p: f64,
    quad_budget: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let t = unwrap_all(tensors);
    to_py(py, &ineq::check_gt_multi(&t, p, &rho(0.0, quad_budget)?).map_err(py_err)?)
}

#[pyfunction]
#[pyo3(signature = (tensors, q, quad_budget=1e-6))]
fn check_log_trace<'py>(
    py: Python<'py>,
    tensors: Vec<PyRef<'py, Tensor>>,
    q: f64,
    quad_budget: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let t = unwrap_all(tensors);
    to_py(py, &ineq::check_log_trace_multi(&t, q, &rho(0.0, quad_budget)?).map_err(py_err)?)
}

#[pyfunction]
fn relative_entropy(a: &Tensor, b: &Tensor) -> PyResult<f64> {
    ineq::relative_entropy(&a.inner, &b.inner).map_err(py_err)
}

/// Run a suite; `config` holds any subset of the suite configuration fields.
#[pyfunction]
#[pyo3(signature = (config=None))]
fn run_suite<'py>(py: Python<'py>, config: Option<&Bound<'py, PyDict>>) -> PyResult<Bound<'py, PyAny>> {
    let cfg: SuiteConfig = match config {
        Some(d) => {
            let text: String = py.import("json")?.call_method1("dumps", (d,))?.extract()?;
            serde_json::from_str(&text).map_err(|e| py_err(e.into()))?
        }
        None => SuiteConfig::default(),
    };
    let result = py.detach(|| run_suite_core(&cfg)).map_err(py_err)?;
    to_py(py, &result)
}

#[pymodule]
fn tracegym(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Tensor>()?;
    m.add_function(wrap_pyfunction!(check_gt_two, m)?)?;
    m.add_function(wrap_pyfunction!(check_alt_two, m)?)?;
    m.add_function(wrap_pyfunction!(check_alt_multi, m)?)?;
    m.add_function(wrap_pyfunction!(check_gt_multi, m)?)?;
    m.add_function(wrap_pyfunction!(check_log_trace, m)?)?;
    m.add_function(wrap_pyfunction!(relative_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
