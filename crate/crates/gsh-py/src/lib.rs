//! Python bindings: the evaluation oracle, gradient/Hessian estimators,
//! minimal sample sets, quadratic interpolation and convergence studies.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use gsh_core::analysis::{
    by_name, convergence_study, oracle_for, radii_geometric, EvaluationOracle, OrderFit,
    StudyMode,
};
use gsh_core::geometry::{enumerate_gsh_points, DirectionMatrix, SamplePlan};
use gsh_core::gradient;
use gsh_core::hessian::{self, HessianEstimate};
use gsh_core::linalg;
use gsh_core::poised;
use gsh_core::{Matrix, Vector};

fn core_err(e: gsh_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_matrix(rows: &[Vec<f64>]) -> PyResult<Matrix> {
    if rows.is_empty() || rows[0].is_empty() {
        return Err(PyValueError::new_err("matrix must be non-empty"));
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err("matrix rows must have equal length"));
    }
    Ok(Matrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

fn from_matrix(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn direction(rows: &[Vec<f64>]) -> PyResult<DirectionMatrix> {
    DirectionMatrix::new(to_matrix(rows)?).map_err(core_err)
}

/// A scalar black-box function behind a memoizing, counting cache.
///
/// Wraps a Python callable taking a list of floats and returning a float.
/// Exceptions and non-finite returns surface as evaluation errors.
#[pyclass]
struct Oracle {
    inner: Arc<EvaluationOracle>,
}

#[pymethods]
impl Oracle {
    #[new]
    fn new(dim: usize, func: Py<PyAny>) -> PyResult<Self> {
        if dim == 0 {
            return Err(PyValueError::new_err("dimension must be at least 1"));
        }
        let inner = EvaluationOracle::new(dim, move |x: &Vector| {
            Python::attach(|py| {
                let args = (x.iter().cloned().collect::<Vec<f64>>(),);
                match func.call1(py, args).and_then(|v| v.extract::<f64>(py)) {
                    Ok(v) => v,
                    Err(_) => f64::NAN,
                }
            })
        });
        Ok(Oracle {
            inner: Arc::new(inner),
        })
    }

    /// Number of distinct points evaluated so far.
    fn distinct_count(&self) -> usize {
        self.inner.distinct_count()
    }

    /// Total evaluation requests, cache hits included.
    fn raw_calls(&self) -> usize {
        self.inner.raw_calls()
    }

    fn reset(&self) {
        self.inner.reset();
    }
}

fn shared_plan(x0: Vec<f64>, s: &[Vec<f64>], t: &[Vec<f64>]) -> PyResult<SamplePlan> {
    SamplePlan::shared(Vector::from_vec(x0), direction(s)?, direction(t)?).map_err(core_err)
}

fn estimate_dict<'py>(py: Python<'py>, est: &HessianEstimate) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("mode", est.mode.to_string())?;
    d.set_item("matrix", from_matrix(&est.matrix))?;
    d.set_item("s_case", est.case.s_case.to_string())?;
    d.set_item("t_case", est.case.t_case.to_string())?;
    d.set_item("eval_count", est.eval_count)?;
    Ok(d)
}

/// Moore-Penrose pseudoinverse of a matrix given as a list of rows.
#[pyfunction]
fn pseudoinverse(a: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    Ok(from_matrix(
        &linalg::pseudoinverse(&to_matrix(&a)?).map_err(core_err)?,
    ))
}

/// Generalized simplex gradient of `oracle` at `x0` over the columns of `s`.
/// Returns `{"vector": [...], "eval_count": n}`.
#[pyfunction]
fn simplex_gradient<'py>(
    py: Python<'py>,
    oracle: PyRef<'py, Oracle>,
    x0: Vec<f64>,
    s: Vec<Vec<f64>>,
) -> PyResult<Bound<'py, PyDict>> {
    let est = gradient::gsg(&oracle.inner, &Vector::from_vec(x0), &direction(&s)?)
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    let d = PyDict::new(py);
    d.set_item("vector", est.vector.iter().cloned().collect::<Vec<f64>>())?;
    d.set_item("eval_count", est.eval_count)?;
    Ok(d)
}

/// Simplex Hessian estimate over a shared `t`; `mode` is "gsh" or "gcsh".
#[pyfunction]
#[pyo3(signature = (oracle, x0, s, t, mode = "gsh"))]
fn simplex_hessian<'py>(
    py: Python<'py>,
    oracle: PyRef<'py, Oracle>,
    x0: Vec<f64>,
    s: Vec<Vec<f64>>,
    t: Vec<Vec<f64>>,
    mode: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let plan = shared_plan(x0, &s, &t)?;
    let est = match mode {
        "gsh" => hessian::gsh(&oracle.inner, &plan),
        "gcsh" => hessian::gcsh(&oracle.inner, &plan),
        other => {
            return Err(PyValueError::new_err(format!(
                "mode must be \"gsh\" or \"gcsh\", got {other:?}"
            )))
        }
    }
    .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    estimate_dict(py, &est)
}

/// Points of the minimal sample set generated by `(S, U_ell)` at `x0`,
/// with `S` defaulting to the identity.
#[pyfunction]
#[pyo3(signature = (dim, ell, x0 = None, s = None))]
fn minimal_set(
    dim: usize,
    ell: usize,
    x0: Option<Vec<f64>>,
    s: Option<Vec<Vec<f64>>>,
) -> PyResult<Vec<Vec<f64>>> {
    let x0 = Vector::from_vec(x0.unwrap_or_else(|| vec![0.0; dim]));
    if x0.len() != dim {
        return Err(PyValueError::new_err("x0 dimension mismatch"));
    }
    let s = match s {
        Some(rows) => direction(&rows)?,
        None => DirectionMatrix::scaled_identity(dim, 1.0).map_err(core_err)?,
    };
    let u = poised::build_u(&s, ell).map_err(core_err)?;
    let plan = SamplePlan::shared(x0, s, u).map_err(core_err)?;
    Ok(enumerate_gsh_points(&plan)
        .points()
        .iter()
        .map(|p| p.iter().cloned().collect())
        .collect())
}

/// Closed-form quadratic interpolation over the minimal set of `(S, U_ell)`.
/// Returns `{"alpha0": float, "alpha": [...], "H": [[...]]}`.
#[pyfunction]
fn quadratic_model<'py>(
    py: Python<'py>,
    oracle: PyRef<'py, Oracle>,
    x0: Vec<f64>,
    s: Vec<Vec<f64>>,
    ell: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let model = poised::qi_closed_form(&oracle.inner, &Vector::from_vec(x0), &direction(&s)?, ell)
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    let d = PyDict::new(py);
    d.set_item("alpha0", model.alpha0)?;
    d.set_item("alpha", model.alpha.iter().cloned().collect::<Vec<f64>>())?;
    d.set_item("H", from_matrix(&model.hessian))?;
    Ok(d)
}

/// Convergence study of a catalog function over a geometric radius grid.
#[pyfunction]
#[pyo3(signature = (func, mode = "gsh", start = 1e-1, stop = 1e-3, count = 8))]
fn convergence<'py>(
    py: Python<'py>,
    func: &str,
    mode: &str,
    start: f64,
    stop: f64,
    count: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let f = by_name(func).ok_or_else(|| PyValueError::new_err(format!("unknown function {func:?}")))?;
    let mode = match mode {
        "gsg" => StudyMode::Gsg,
        "gsh" => StudyMode::Gsh,
        "gcsh" => StudyMode::Gcsh,
        other => {
            return Err(PyValueError::new_err(format!(
                "mode must be gsg, gsh or gcsh, got {other:?}"
            )))
        }
    };
    let n = f.dim();
    let s = DirectionMatrix::scaled_identity(n, 1.0).map_err(core_err)?;
    let template = SamplePlan::shared(Vector::zeros(n), s.clone(), s).map_err(core_err)?;
    let radii = radii_geometric(start, stop, count).map_err(core_err)?;
    let report = convergence_study(&f, &template, &radii, mode)
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;

    let d = PyDict::new(py);
    d.set_item("mode", report.mode.to_string())?;
    match report.fit {
        OrderFit::Exact => {
            d.set_item("exact", true)?;
        }
        OrderFit::Fitted { order, constant } => {
            d.set_item("exact", false)?;
            d.set_item("fitted_order", order)?;
            d.set_item("fitted_constant", constant)?;
        }
    }
    let rows: Vec<(f64, f64, Option<f64>)> = report
        .rows
        .iter()
        .map(|r| (r.delta, r.error, r.bound))
        .collect();
    d.set_item("rows", rows)?;
    Ok(d)
}

/// Distinct evaluation count a catalog function needs for one estimate; a
/// convenience for demonstrating minimal-set economy from Python.
#[pyfunction]
fn catalog_eval_count(func: &str, ell: usize, h: f64) -> PyResult<usize> {
    let f = by_name(func).ok_or_else(|| PyValueError::new_err(format!("unknown function {func:?}")))?;
    let n = f.dim();
    let s = DirectionMatrix::scaled_identity(n, h).map_err(core_err)?;
    let u = poised::build_u(&s, ell).map_err(core_err)?;
    let plan = SamplePlan::shared(Vector::zeros(n), s, u).map_err(core_err)?;
    let oracle = oracle_for(&f);
    let est = hessian::gsh(&oracle, &plan).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(est.eval_count)
}

/// Names of the built-in catalog functions for a dimension.
#[pyfunction]
fn catalog_names(dim: usize) -> Vec<String> {
    gsh_core::analysis::catalog(dim)
        .iter()
        .map(|f| f.name().to_string())
        .collect()
}

#[pymodule]
fn gsh(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Oracle>()?;
    m.add_function(wrap_pyfunction!(pseudoinverse, m)?)?;
    m.add_function(wrap_pyfunction!(simplex_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(simplex_hessian, m)?)?;
    m.add_function(wrap_pyfunction!(minimal_set, m)?)?;
    m.add_function(wrap_pyfunction!(quadratic_model, m)?)?;
    m.add_function(wrap_pyfunction!(convergence, m)?)?;
    m.add_function(wrap_pyfunction!(catalog_eval_count, m)?)?;
    m.add_function(wrap_pyfunction!(catalog_names, m)?)?;
    Ok(())
}
