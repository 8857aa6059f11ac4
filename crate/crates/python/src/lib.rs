//! Python bindings: quartics, sum-of-squares reports, cone decomposition
//! and witness extraction. Matrices cross the boundary as lists of rows.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use quartic_sos::cone::{self, Atom, AtomicMeasure};
use quartic_sos::gram;
use quartic_sos::pipeline::{self, AnalysisReport, SosCertificate, Verdict};
use quartic_sos::quartic::{QuadraticForm, TernaryQuartic};
use quartic_sos::sdp::{self, GramResult, SdpOptions};
use quartic_sos::{Error, SymMatrix};

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidInput(_)
        | Error::DimensionMismatch { .. }
        | Error::NotInCone { .. }
        | Error::NotPsd { .. }
        | Error::NegativeWeight(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn matrix_from_rows(rows: Vec<Vec<f64>>) -> PyResult<SymMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    let dense: Vec<f64> = rows.into_iter().flatten().collect();
    SymMatrix::from_dense(n, &dense).map_err(to_py_err)
}

fn options(tol: f64, trials: usize, seed: u64) -> SdpOptions {
    SdpOptions { tol, trials, seed, ..SdpOptions::default() }
}

/// A ternary quartic; coefficients in the order
/// x⁴, x³y, x³z, x²y², x²yz, x²z², xy³, xy²z, xyz², xz³, y⁴, y³z, y²z², yz³, z⁴.
#[pyclass(name = "Quartic", module = "quartic_sos", from_py_object)]
#[derive(Clone)]
struct PyQuartic {
    inner: TernaryQuartic,
}

#[pymethods]
impl PyQuartic {
    #[new]
    fn new(coeffs: Vec<f64>) -> PyResult<Self> {
        let arr: [f64; 15] =
            coeffs.try_into().map_err(|_| PyValueError::new_err("expected 15 coefficients"))?;
        if arr.iter().any(|c| !c.is_finite()) {
            return Err(PyValueError::new_err("coefficients must be finite"));
        }
        Ok(Self { inner: TernaryQuartic::from_coeffs(arr) })
    }

    /// Parses `{"p": {"400": 1, ...}}` or `{"parray": [...]}`.
    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(Self { inner: serde_json::from_str(s).map_err(json_err)? })
    }

    /// Builds `sum q_i^2` from quadratic coefficient lists `(x², xy, xz, y², yz, z²)`.
    #[staticmethod]
    fn from_squares(squares: Vec<[f64; 6]>) -> Self {
        let qs: Vec<QuadraticForm> = squares.into_iter().map(QuadraticForm::new).collect();
        Self { inner: quartic_sos::expand_squares(&qs) }
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(json_err)
    }

    #[getter]
    fn coeffs(&self) -> Vec<f64> {
        self.inner.coeffs().to_vec()
    }

    fn evaluate(&self, x: f64, y: f64, z: f64) -> f64 {
        self.inner.evaluate(x, y, z)
    }

    fn __repr__(&self) -> String {
        format!("Quartic({})", self.inner)
    }
}

/// Result of `sos_representation`.
#[pyclass(name = "SosReport", module = "quartic_sos", from_py_object)]
#[derive(Clone)]
struct PySosReport {
    inner: AnalysisReport,
}

#[pymethods]
impl PySosReport {
    /// `True` for a sum-of-squares verdict.
    #[getter]
    fn is_sos(&self) -> bool {
        matches!(self.inner.verdict, Verdict::Sos(_))
    }

    #[getter]
    fn squares(&self) -> Option<Vec<[f64; 6]>> {
        self.inner.certificate.as_ref().map(|c| c.squares.iter().map(|q| q.q).collect())
    }

    #[getter]
    fn gram(&self) -> Option<Vec<Vec<f64>>> {
        self.inner.certificate.as_ref().map(|c| c.gram.to_rows())
    }

    #[getter]
    fn residual(&self) -> Option<f64> {
        self.inner.certificate.as_ref().map(|c| c.residual)
    }

    #[getter]
    fn rank_ratio(&self) -> Option<f64> {
        self.inner.certificate.as_ref().map(|c| c.rank_ratio)
    }

    #[getter]
    fn witness(&self) -> Option<[f64; 3]> {
        self.inner.witness.map(|w| w.point)
    }

    /// `"trivial"`, `"rank3"`, `"feasibility"` or `"infeasible"`.
    #[getter]
    fn path(&self) -> PyResult<String> {
        let v = serde_json::to_value(self.inner.diagnostics.path).map_err(json_err)?;
        Ok(v.as_str().unwrap_or_default().to_string())
    }

    fn certificate_json(&self) -> PyResult<Option<String>> {
        self.inner.certificate.as_ref().map(|c| serde_json::to_string(c).map_err(json_err)).transpose()
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(json_err)
    }

    fn __repr__(&self) -> String {
        match self.inner.verdict {
            Verdict::Sos(n) => format!("SosReport(sos, {n} squares)"),
            Verdict::NotNonnegative(p) => format!("SosReport(not nonnegative at {p:?})"),
        }
    }
}

#[pyfunction]
#[pyo3(signature = (p, tol = 1e-8, trials = 20, seed = 0))]
fn sos_representation(p: &PyQuartic, tol: f64, trials: usize, seed: u64) -> PyResult<PySosReport> {
    let inner = pipeline::sos_representation(&p.inner, &options(tol, trials, seed)).map_err(to_py_err)?;
    Ok(PySosReport { inner })
}

/// Checks a certificate (as produced by `SosReport.certificate_json`).
#[pyfunction]
#[pyo3(signature = (p, certificate_json, tol = 1e-6))]
fn verify(p: &PyQuartic, certificate_json: &str, tol: f64) -> PyResult<(bool, f64)> {
    let cert: SosCertificate = serde_json::from_str(certificate_json).map_err(json_err)?;
    let r = pipeline::verify(&p.inner, &cert, tol);
    Ok((r.pass, r.gap))
}

/// A PSD Gram matrix of `p`, or `None` when none exists.
#[pyfunction]
#[pyo3(signature = (p, tol = 1e-8))]
fn find_gram(p: &PyQuartic, tol: f64) -> PyResult<Option<Vec<Vec<f64>>>> {
    match sdp::find_gram(&p.inner, &options(tol, 1, 0)).map_err(to_py_err)? {
        GramResult::Gram(g) => Ok(Some(g.to_rows())),
        GramResult::Certificate(_) => Ok(None),
    }
}

/// A point where `p` is negative, or `None` when `p` is a sum of squares.
#[pyfunction]
#[pyo3(signature = (p, tol = 1e-8))]
fn negativity_witness(p: &PyQuartic, tol: f64) -> PyResult<Option<[f64; 3]>> {
    let opts = options(tol, 1, 0);
    match sdp::find_gram(&p.inner, &opts).map_err(to_py_err)? {
        GramResult::Gram(_) => Ok(None),
        GramResult::Certificate(c) => {
            sdp::negativity_witness_with(&c, &p.inner, &opts.tolerances()).map(Some).map_err(to_py_err)
        }
    }
}

/// Splits a 6x6 moment-cone matrix into `[(rho, (x, y, z)), ...]`.
#[pyfunction]
fn decompose(matrix: Vec<Vec<f64>>) -> PyResult<Vec<(f64, [f64; 3])>> {
    let a = matrix_from_rows(matrix)?;
    let m = cone::decompose(&a).map_err(to_py_err)?;
    Ok(m.atoms.into_iter().map(|a| (a.rho, a.point)).collect())
}

/// `sum rho v(p) v(p)^T` as a list of rows.
#[pyfunction]
fn reconstruct(atoms: Vec<(f64, [f64; 3])>) -> PyResult<Vec<Vec<f64>>> {
    let m = AtomicMeasure { atoms: atoms.into_iter().map(|(rho, point)| Atom { rho, point }).collect() };
    Ok(cone::reconstruct(&m).map_err(to_py_err)?.to_rows())
}

/// `(A0, b)`: the particular Gram matrix and the fifteen constraint values.
#[pyfunction]
fn gram_frame(p: &PyQuartic) -> (Vec<Vec<f64>>, Vec<f64>) {
    let f = gram::frame(&p.inner);
    (f.a0.to_rows(), f.b)
}

/// `v^T A v` as a quartic.
#[pyfunction]
fn gram_to_quartic(matrix: Vec<Vec<f64>>) -> PyResult<PyQuartic> {
    let a = matrix_from_rows(matrix)?;
    if a.dim() != 6 {
        return Err(PyValueError::new_err("expected a 6x6 matrix"));
    }
    Ok(PyQuartic { inner: quartic_sos::gram_to_quartic(&a) })
}

#[pymodule]
#[pyo3(name = "quartic_sos")]
fn quartic_sos_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyQuartic>()?;
    m.add_class::<PySosReport>()?;
    m.add_function(wrap_pyfunction!(sos_representation, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(find_gram, m)?)?;
    m.add_function(wrap_pyfunction!(negativity_witness, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct, m)?)?;
    m.add_function(wrap_pyfunction!(gram_frame, m)?)?;
    m.add_function(wrap_pyfunction!(gram_to_quartic, m)?)?;
    Ok(())
}
