//! Python bindings: `qcurv.System` and the scans behind the command line.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::Value;

use qcurv_core::arith::Matrix;
use qcurv_core::birkhoff::{ellipticity_and_constancy, prepare, specialize, DoubleDouble};
use qcurv_core::cli::{self, exit_code, parse_expr, parse_qfunction, parse_system, serialize_system};
use qcurv_core::curvature::{curvature_scan, ScanMode};
use qcurv_core::frobenius::{default_exponent_bound, exponents, system_at_infinity, triviality_test};
use qcurv_core::qdiff::QDiffSystem;
use qcurv_core::rootdyn::{is_q_power, lemma_scan, mu_stability};
use qcurv_core::Error;

fn to_py(e: Error) -> PyErr {
    if exit_code(&e) == 1 {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn value_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any(),
            (None, Some(u)) => u.into_pyobject(py)?.into_any(),
            _ => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(value_to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, value_to_py(py, item)?)?;
            }
            dict.into_any()
        }
    })
}

fn ser<'py, T: serde::Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let value = serde_json::to_value(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    value_to_py(py, &value)
}

fn scan_mode(mode: &str, rmax: u64) -> PyResult<ScanMode> {
    match mode {
        "zero" => Ok(ScanMode::Zero),
        "nilpotent" => Ok(ScanMode::Nilpotent),
        "order" => Ok(ScanMode::Order(rmax)),
        other => Err(PyValueError::new_err(format!("unknown mode '{other}' (zero, nilpotent, order)"))),
    }
}

/// A linear q-difference system `Y(qx) = A₁(x) Y(x)`.
#[pyclass(name = "System", module = "qcurv", frozen)]
struct PySystem {
    inner: QDiffSystem,
}

#[pymethods]
impl PySystem {
    /// Parse a system file (`rank`, `char`, `A1=[[...]]` or `a0, a1, ...`).
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(PySystem { inner: parse_system(text).map_err(to_py)? })
    }

    /// Scalar system `y(qx) = f(x) y(x)`.
    #[staticmethod]
    fn scalar(expr: &str) -> PyResult<Self> {
        let f = parse_expr(expr, None).map_err(to_py)?;
        Ok(PySystem { inner: QDiffSystem::scalar(f).map_err(to_py)? })
    }

    #[staticmethod]
    fn identity(rank: usize) -> Self {
        PySystem { inner: QDiffSystem::identity(rank) }
    }

    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    #[getter]
    fn characteristic(&self) -> Option<u64> {
        self.inner.characteristic()
    }

    /// Entries of `A₁` as expression strings.
    fn a1(&self) -> Vec<Vec<String>> {
        self.inner.a1().to_rows().iter().map(|r| r.iter().map(|e| e.to_string()).collect()).collect()
    }

    fn serialize(&self) -> String {
        serialize_system(&self.inner)
    }

    /// `A ↦ S(qx)⁻¹ A S(x)` for a matrix of expression strings.
    fn gauge(&self, rows: Vec<Vec<String>>) -> PyResult<Self> {
        let ch = self.inner.characteristic();
        let entries = rows
            .iter()
            .map(|r| r.iter().map(|e| parse_expr(e, ch)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(to_py)?;
        let s = Matrix::from_rows(&(), entries);
        if !s.is_square() || s.rows() != self.inner.rank() {
            return Err(PyValueError::new_err("gauge must be square of the system's rank"));
        }
        Ok(PySystem { inner: self.inner.gauge(&s).map_err(to_py)? })
    }

    fn tensor(&self, other: &PySystem) -> Self {
        PySystem { inner: self.inner.tensor(&other.inner) }
    }

    fn dual(&self) -> Self {
        PySystem { inner: self.inner.dual() }
    }

    fn direct_sum(&self, other: &PySystem) -> Self {
        PySystem { inner: self.inner.direct_sum(&other.inner) }
    }

    /// Curvature verdicts for every order in `lmin..=lmax`.
    #[pyo3(signature = (lmin=2, lmax=23, mode="zero", rmax=8, primes_only=false))]
    fn curvatures<'py>(
        &self,
        py: Python<'py>,
        lmin: u64,
        lmax: u64,
        mode: &str,
        rmax: u64,
        primes_only: bool,
    ) -> PyResult<Bound<'py, PyAny>> {
        let mode = scan_mode(mode, rmax)?;
        let rep = py.detach(|| curvature_scan(&self.inner, lmin, lmax, mode, primes_only)).map_err(to_py)?;
        ser(py, &rep)
    }

    #[pyo3(signature = (lmax=23, series_order=None, degree=8))]
    fn triviality<'py>(
        &self,
        py: Python<'py>,
        lmax: u64,
        series_order: Option<usize>,
        degree: usize,
    ) -> PyResult<Bound<'py, PyAny>> {
        let v = py.detach(|| triviality_test(&self.inner, lmax, series_order, degree));
        value_to_py(py, &cli::triviality_value(&v))
    }

    /// Exponents at `0` and `∞` (`None` where `A₁` has no finite invertible value).
    fn exponents<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let at_zero = exponents(&self.inner, default_exponent_bound(&self.inner)).ok();
        let inf = system_at_infinity(&self.inner).map_err(to_py)?;
        let at_inf = exponents(&inf, default_exponent_bound(&inf)).ok();
        let dict = PyDict::new(py);
        dict.set_item("zero", ser(py, &at_zero)?)?;
        dict.set_item("infinity", ser(py, &at_inf)?)?;
        Ok(dict.into_any())
    }

    /// Ellipticity, constancy and truncation residuals of the Birkhoff matrix.
    #[pyo3(signature = (q_val=Complex64::new(2.0, 0.0), tol=1e-10, samples=16, precision="double"))]
    fn birkhoff<'py>(
        &self,
        py: Python<'py>,
        q_val: Complex64,
        tol: f64,
        samples: usize,
        precision: &str,
    ) -> PyResult<Bound<'py, PyAny>> {
        let prep = prepare(&self.inner).map_err(to_py)?;
        let sample = py
            .detach(|| match precision {
                "double" => specialize::<f64>(Some(&prep), q_val)
                    .and_then(|ns| ellipticity_and_constancy(&ns, samples, tol)),
                "double-double" => specialize::<DoubleDouble>(Some(&prep), q_val)
                    .and_then(|ns| ellipticity_and_constancy(&ns, samples, tol)),
                other => Err(Error::Invalid(format!("unknown precision '{other}'"))),
            })
            .map_err(to_py)?;
        ser(py, &sample)
    }

    fn __repr__(&self) -> String {
        format!("System(rank={}, A1={:?})", self.inner.rank(), self.a1())
    }

    fn __eq__(&self, other: &PySystem) -> bool {
        self.inner == other.inner
    }
}

/// `d` with `f = q^d`, or `None`.
#[pyfunction]
fn q_power(f: &str) -> PyResult<Option<i64>> {
    is_q_power(&parse_qfunction(f, None).map_err(to_py)?).map_err(to_py)
}

/// Whether `f(ζ_ℓ)` is again an `ℓ`-th root of unity.
#[pyfunction]
fn stability<'py>(py: Python<'py>, f: &str, ell: u64) -> PyResult<Bound<'py, PyAny>> {
    let f = parse_qfunction(f, None).map_err(to_py)?;
    ser(py, &mu_stability(&f, ell).map_err(to_py)?)
}

/// Stability at every prime up to `lmax`.
#[pyfunction]
#[pyo3(signature = (f, lmax=100))]
fn rootdyn<'py>(py: Python<'py>, f: &str, lmax: u64) -> PyResult<Bound<'py, PyAny>> {
    let f = parse_qfunction(f, None).map_err(to_py)?;
    let rep = py.detach(|| lemma_scan(&f, lmax)).map_err(to_py)?;
    ser(py, &rep)
}

/// Run the command line in-process: `(exit code, stdout, stderr)`.
#[pyfunction]
fn run(args: Vec<String>) -> (i32, String, String) {
    let out = cli::run(std::iter::once("qcurv".to_string()).chain(args));
    (out.code, out.stdout, out.stderr)
}

#[pymodule]
fn qcurv(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystem>()?;
    m.add_function(wrap_pyfunction!(q_power, m)?)?;
    m.add_function(wrap_pyfunction!(stability, m)?)?;
    m.add_function(wrap_pyfunction!(rootdyn, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
