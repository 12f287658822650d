//! Python bindings for `ncairy`.

use ncairy::kernels::{CouplingMatrix, ShiftVector};
use ncairy::tw::{GapQuery, GapResult, Route};
use ncairy::{CMat, Complex64, Error};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidInput(_) | Error::Domain(_) | Error::OutOfRange { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn coupling(rows: Vec<Vec<Complex64>>) -> PyResult<CouplingMatrix> {
    let r = rows.len();
    if r == 0 || rows.iter().any(|row| row.len() != r) {
        return Err(PyValueError::new_err("coupling must be a nonempty square matrix"));
    }
    CouplingMatrix::new(CMat::from_fn(r, |j, k| rows[j][k])).map_err(py_err)
}

fn rows(m: &CMat) -> Rows {
    (0..m.dim()).map(|j| (0..m.dim()).map(|k| m[(j, k)]).collect()).collect()
}

fn route(name: &str) -> PyResult<Route> {
    match name {
        "nystrom" => Ok(Route::Nystrom),
        "painleve" => Ok(Route::Painleve),
        "both" => Ok(Route::Both),
        _ => Err(PyValueError::new_err(format!("unknown route '{name}'"))),
    }
}

fn query(shifts: Vec<f64>, c: Vec<Vec<Complex64>>, r: &str) -> PyResult<GapQuery> {
    let s = ShiftVector::new(shifts).map_err(py_err)?;
    GapQuery::new(s, coupling(c)?, route(r)?, ncairy::fredholm::DEFAULT_TOL).map_err(py_err)
}

type Gap = (Option<Complex64>, Option<Complex64>);
type Rows = Vec<Vec<Complex64>>;

fn gap(g: GapResult) -> Gap {
    (g.nystrom.map(|d| d.value), g.painleve)
}

/// `(Ai, Ai', Bi, Bi')` at `x`.
#[pyfunction]
fn airy(x: f64) -> PyResult<(f64, f64, f64, f64)> {
    let a = ncairy::airy::airy_eval(x).map_err(py_err)?;
    Ok((a.ai, a.aip, a.bi, a.bip))
}

/// `(nystrom, painleve)` values of `det(Id - Ai_s^2)`; a route not taken is `None`.
#[pyfunction]
#[pyo3(signature = (shifts, coupling, route = "both"))]
fn det_airy_sq(shifts: Vec<f64>, coupling: Vec<Vec<Complex64>>, route: &str) -> PyResult<Gap> {
    let q = query(shifts, coupling, route)?;
    ncairy::tw::det_airy_sq(&q).map(gap).map_err(py_err)
}

/// `(nystrom, painleve)` values of `det(Id + sign Ai_s)`.
#[pyfunction]
#[pyo3(signature = (shifts, coupling, sign, route = "both"))]
fn det_airy(shifts: Vec<f64>, coupling: Vec<Vec<Complex64>>, sign: f64, route: &str) -> PyResult<Gap> {
    let q = query(shifts, coupling, route)?;
    ncairy::tw::det_airy(&q, sign).map(gap).map_err(py_err)
}

/// `det(Id + z K)` on the complex contour.
#[pyfunction]
#[pyo3(signature = (shifts, coupling, z, nodes = ncairy::fredholm::DEFAULT_NODES))]
fn det_contour(shifts: Vec<f64>, coupling: Vec<Vec<Complex64>>, z: Complex64, nodes: usize) -> PyResult<Complex64> {
    let s = ShiftVector::new(shifts).map_err(py_err)?;
    let c = self::coupling(coupling)?;
    ncairy::tw::det_contour(&s, &c, z, nodes).map(|d| d.value).map_err(py_err)
}

/// `[(S, beta1, D beta1)]` of the Hastings-McLeod solution at the requested `S` values.
#[pyfunction]
#[pyo3(signature = (coupling, delta, s_values))]
fn hm_solve(
    coupling: Vec<Vec<Complex64>>,
    delta: Vec<f64>,
    s_values: Vec<f64>,
) -> PyResult<Vec<(f64, Rows, Rows)>> {
    let c = self::coupling(coupling)?;
    let lo = s_values.iter().copied().fold(f64::INFINITY, f64::min);
    let opts = ncairy::ncp2::HmOptions::default();
    let grid = ncairy::ncp2::hm_solve(&c, &delta, lo.min(opts.s0) - 0.01, &opts).map_err(py_err)?;
    s_values
        .into_iter()
        .map(|s| Ok((s, rows(&grid.beta1(s).map_err(py_err)?), rows(&grid.dbeta1(s).map_err(py_err)?))))
        .collect()
}

/// GUE Tracy-Widom distribution.
#[pyfunction]
fn tw_f2(x: f64) -> PyResult<f64> {
    ncairy::tw::scalar_f2(x).map_err(py_err)
}

/// GOE Tracy-Widom distribution.
#[pyfunction]
fn tw_f1(x: f64) -> PyResult<f64> {
    ncairy::tw::scalar_f1(x).map_err(py_err)
}

/// `[(name, passed, report_line)]` for every named check.
#[pyfunction]
#[pyo3(signature = (seed = 7))]
fn verify(py: Python<'_>, seed: u64) -> Vec<(String, bool, String)> {
    let checks = py.detach(|| ncairy::verify::run_suite(seed, |_| {}));
    checks.iter().map(|c| (c.name.to_string(), c.passed(), c.line())).collect()
}

#[pymodule]
fn ncairy_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(airy, m)?)?;
    m.add_function(wrap_pyfunction!(det_airy_sq, m)?)?;
    m.add_function(wrap_pyfunction!(det_airy, m)?)?;
    m.add_function(wrap_pyfunction!(det_contour, m)?)?;
    m.add_function(wrap_pyfunction!(hm_solve, m)?)?;
    m.add_function(wrap_pyfunction!(tw_f2, m)?)?;
    m.add_function(wrap_pyfunction!(tw_f1, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
