//! Python bindings: matrices are lists of rows of Python `complex`.

use std::collections::HashMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use monolab::cli::{parse_spec, render, run, Command, Overrides};
use monolab::deformation::schlesinger_rhs as core_schlesinger_rhs;
use monolab::expr::{parse, EvalContext};
use monolab::fuchsian;
use monolab::halphen::Prop0Config;
use monolab::numcore::{self, Complex, ComplexMatrix};
use monolab::pathint::ToleranceSpec;

type PyMatrix = Vec<Vec<Complex>>;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_matrix(rows: PyMatrix) -> PyResult<ComplexMatrix> {
    ComplexMatrix::from_rows(rows).map_err(err)
}

fn from_matrix(m: &ComplexMatrix) -> PyMatrix {
    m.rows()
}

fn tolerance(rel_tol: f64, abs_tol: f64) -> PyResult<ToleranceSpec> {
    let t = ToleranceSpec::new(rel_tol, abs_tol);
    t.validate().map_err(err)?;
    Ok(t)
}

#[pyfunction]
fn mat_exp(m: PyMatrix) -> PyResult<PyMatrix> {
    Ok(from_matrix(&numcore::mat_exp(&to_matrix(m)?).map_err(err)?))
}

/// Principal logarithm; raises ValueError on singular input or eigenvalues on the negative real axis.
#[pyfunction]
fn mat_log(m: PyMatrix) -> PyResult<PyMatrix> {
    Ok(from_matrix(&numcore::mat_log_principal(&to_matrix(m)?).map_err(err)?))
}

/// Eigenvalues sorted by (real, imaginary).
#[pyfunction]
fn eigenvalues(m: PyMatrix) -> PyResult<Vec<Complex>> {
    Ok(numcore::eigenvalues(&to_matrix(m)?).map_err(err)?.values().to_vec())
}

/// Canonical printed form of an expression.
#[pyfunction]
fn parse_expr(text: &str) -> PyResult<String> {
    Ok(parse(text).map_err(err)?.to_string())
}

#[pyfunction]
#[pyo3(signature = (text, variables=None))]
fn eval_expr(text: &str, variables: Option<HashMap<String, Complex>>) -> PyResult<Complex> {
    let e = parse(text).map_err(err)?;
    let mut ctx = EvalContext::new();
    for (k, v) in variables.unwrap_or_default() {
        ctx.bind(&k, v);
    }
    e.eval(&ctx).map_err(err)
}

#[pyclass(name = "FuchsianSystem", frozen)]
struct PyFuchsianSystem {
    inner: fuchsian::FuchsianSystem,
}

#[pymethods]
impl PyFuchsianSystem {
    #[new]
    fn new(poles: Vec<Complex>, residues: Vec<PyMatrix>) -> PyResult<Self> {
        let residues = residues.into_iter().map(to_matrix).collect::<PyResult<Vec<_>>>()?;
        Ok(Self { inner: fuchsian::FuchsianSystem::new(poles, residues).map_err(err)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn poles(&self) -> Vec<Complex> {
        self.inner.poles().to_vec()
    }

    #[getter]
    fn residues(&self) -> Vec<PyMatrix> {
        self.inner.residues().iter().map(from_matrix).collect()
    }

    fn default_base_point(&self) -> PyResult<Complex> {
        Ok(fuchsian::default_base_point(&[&self.inner]).map_err(err)?.point)
    }

    /// Monodromy matrices about every pole from a shared base point.
    #[pyo3(signature = (base_point=None, rel_tol=1e-10, abs_tol=1e-12))]
    fn monodromy(&self, base_point: Option<Complex>, rel_tol: f64, abs_tol: f64) -> PyResult<Vec<PyMatrix>> {
        let tuple = fuchsian::monodromy_tuple(&self.inner, base_point, &tolerance(rel_tol, abs_tol)?).map_err(err)?;
        Ok(tuple.entries.iter().map(|e| from_matrix(&e.matrix)).collect())
    }

    fn __repr__(&self) -> String {
        format!("FuchsianSystem(dim={}, poles={:?})", self.inner.dim(), self.inner.poles())
    }
}

#[pyfunction]
fn schlesinger_rhs(positions: Vec<Complex>, velocities: Vec<Complex>, residues: Vec<PyMatrix>) -> PyResult<Vec<PyMatrix>> {
    let residues = residues.into_iter().map(to_matrix).collect::<PyResult<Vec<_>>>()?;
    let d = core_schlesinger_rhs(&positions, &velocities, &residues).map_err(err)?;
    Ok(d.iter().map(from_matrix).collect())
}

/// Runs the Halphen II / Lax check on the default configuration and returns its summary.
#[pyfunction]
#[pyo3(signature = (rel_tol=1e-10, abs_tol=1e-12))]
fn verify_prop0<'py>(py: Python<'py>, rel_tol: f64, abs_tol: f64) -> PyResult<Bound<'py, PyDict>> {
    let rep = Prop0Config::default().run(None, &tolerance(rel_tol, abs_tol)?).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("sign_convention", rep.sign.as_str())?;
    d.set_item("max_scalar_residual", rep.max_scalar_residual)?;
    d.set_item("max_mismatch", rep.max_mismatch)?;
    d.set_item("max_twist_mismatch", rep.max_twist_mismatch)?;
    d.set_item("base_point", rep.base_point)?;
    d.set_item("times", rep.samples.iter().map(|s| s.t).collect::<Vec<_>>())?;
    d.set_item("extracted", rep.samples.iter().map(|s| s.extracted.to_vec()).collect::<Vec<_>>())?;
    d.set_item("predicted", rep.samples.iter().map(|s| s.predicted.to_vec()).collect::<Vec<_>>())?;
    Ok(d)
}

/// Runs a CLI command on spec text and returns the JSON report.
#[pyfunction]
#[pyo3(signature = (spec, command, samples=None))]
fn run_spec(spec: Option<&str>, command: &str, samples: Option<usize>) -> PyResult<String> {
    let command = match command {
        "monodromy" => Command::Monodromy,
        "check-iso" => Command::CheckIso,
        "check-projiso" => Command::CheckProjiso,
        "schlesinger" => Command::Schlesinger,
        "dhv-demo" => Command::DhvDemo,
        other => return Err(PyValueError::new_err(format!("unknown command `{other}`"))),
    };
    let spec = spec.map(parse_spec).transpose().map_err(err)?;
    let out = run(spec.as_ref(), command, &Overrides { samples, ..Overrides::default() }).map_err(err)?;
    Ok(render(&out.report))
}

#[pymodule]
fn pymonolab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(mat_exp, m)?)?;
    m.add_function(wrap_pyfunction!(mat_log, m)?)?;
    m.add_function(wrap_pyfunction!(eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(parse_expr, m)?)?;
    m.add_function(wrap_pyfunction!(eval_expr, m)?)?;
    m.add_function(wrap_pyfunction!(schlesinger_rhs, m)?)?;
    m.add_function(wrap_pyfunction!(verify_prop0, m)?)?;
    m.add_function(wrap_pyfunction!(run_spec, m)?)?;
    m.add_class::<PyFuchsianSystem>()?;
    Ok(())
}
