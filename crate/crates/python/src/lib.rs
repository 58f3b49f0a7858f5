//! Python bindings for `skwaves_core`. Structured results come back as plain
//! dicts (through their JSON form); profiles and parameters are classes.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

use skwaves_core::evolution::{self, ExperimentSpec};
use skwaves_core::functionals::{self, DEFAULT_STEP};
use skwaves_core::report::{self, VerdictOptions};
use skwaves_core::waves::{self, Family, Selector};
use skwaves_core::{elliptic, spectral, Error};

create_exception!(skwaves, DomainError, PyValueError, "No standing wave or invalid parameters.");
create_exception!(skwaves, NumericalError, PyRuntimeError, "A numerical stage failed.");

fn to_py(e: Error) -> PyErr {
    match e.exit_code() {
        2 => DomainError::new_err(e.to_string()),
        _ => NumericalError::new_err(e.to_string()),
    }
}

fn family(name: &str) -> PyResult<Family> {
    name.parse::<Family>().map_err(|e| DomainError::new_err(e.to_string()))
}

fn selector(omega: Option<f64>, k: Option<f64>) -> PyResult<Selector> {
    match (omega, k) {
        (Some(w), None) => Ok(Selector::Omega(w)),
        (None, Some(k)) => Ok(Selector::K(k)),
        _ => Err(DomainError::new_err("give exactly one of omega or k")),
    }
}

fn resolve(fam: &str, r: Option<u32>, omega: Option<f64>, k: Option<f64>) -> PyResult<(Family, u32, Selector)> {
    let f = family(fam)?;
    let r = r.or(f.periodic_exponent()).ok_or_else(|| DomainError::new_err("r is required"))?;
    Ok((f, r, selector(omega, k)?))
}

fn to_dict<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| NumericalError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "WaveParams", frozen, from_py_object)]
#[derive(Clone)]
struct PyWaveParams {
    inner: waves::WaveParams,
}

#[pymethods]
impl PyWaveParams {
    #[getter]
    fn family(&self) -> &'static str {
        self.inner.family.short_name()
    }
    #[getter]
    fn r(&self) -> u32 {
        self.inner.r
    }
    #[getter]
    fn omega(&self) -> f64 {
        self.inner.omega
    }
    #[getter]
    fn k(&self) -> Option<f64> {
        self.inner.k
    }
    #[getter]
    fn a(&self) -> f64 {
        self.inner.a
    }
    #[getter]
    fn b(&self) -> f64 {
        self.inner.b
    }
    #[getter]
    fn c(&self) -> f64 {
        self.inner.c
    }
    #[getter]
    fn alpha(&self) -> Option<f64> {
        self.inner.alpha
    }

    /// `(φ, φ′, φ″)` at `x`.
    fn jet(&self, x: f64) -> (f64, f64, f64) {
        let j = self.inner.jet(x);
        (j.phi, j.dphi, j.d2phi)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &self.inner)
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!("WaveParams(family={}, r={}, omega={}, k={:?}, a={}, b={}, c={})", p.family.short_name(), p.r, p.omega, p.k, p.a, p.b, p.c)
    }
}

#[pyclass(name = "Profile", frozen)]
struct PyProfile {
    inner: waves::Profile,
}

#[pymethods]
impl PyProfile {
    #[getter]
    fn params(&self) -> PyWaveParams {
        PyWaveParams { inner: self.inner.params }
    }
    #[getter]
    fn x(&self) -> Vec<f64> {
        self.inner.grid.nodes().to_vec()
    }
    #[getter]
    fn phi(&self) -> Vec<f64> {
        self.inner.phi.clone()
    }
    #[getter]
    fn dphi(&self) -> Vec<f64> {
        self.inner.dphi.clone()
    }
    #[getter]
    fn d2phi(&self) -> Vec<f64> {
        self.inner.d2phi.clone()
    }
    #[getter]
    fn topology(&self) -> &'static str {
        if self.inner.grid.is_torus() { "torus" } else { "line" }
    }

    /// Largest pointwise residual of the profile equation.
    fn residual(&self) -> f64 {
        waves::ode_residual(&self.inner)
    }

    /// `∫φ²` on the grid.
    fn mass(&self) -> f64 {
        functionals::mass_quadrature(&self.inner)
    }

    fn energy(&self) -> f64 {
        functionals::profile_conserved(&self.inner).energy
    }

    fn write_csv(&self, path: &str) -> PyResult<()> {
        let f = std::fs::File::create(path).map_err(|e| DomainError::new_err(e.to_string()))?;
        self.inner.write_csv(std::io::BufWriter::new(f)).map_err(|e| DomainError::new_err(e.to_string()))
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }
}

#[pyfunction]
#[pyo3(signature = (family, r=None, *, omega=None, k=None))]
fn solve(family: &str, r: Option<u32>, omega: Option<f64>, k: Option<f64>) -> PyResult<PyWaveParams> {
    let (f, r, at) = resolve(family, r, omega, k)?;
    waves::solve(f, r, at).map(|inner| PyWaveParams { inner }).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (family, r=None, *, omega=None, k=None, n=None))]
fn build_profile(family: &str, r: Option<u32>, omega: Option<f64>, k: Option<f64>, n: Option<usize>) -> PyResult<PyProfile> {
    let (f, r, at) = resolve(family, r, omega, k)?;
    waves::build_profile(f, r, at, n).map(|inner| PyProfile { inner }).map_err(to_py)
}

#[pyfunction]
fn solitary_threshold(r: u32) -> PyResult<f64> {
    waves::solitary_threshold(r).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (family, r=None, *, omega=None, k=None, n=None, tol_kernel=None))]
fn spectrum<'py>(
    py: Python<'py>,
    family: &str,
    r: Option<u32>,
    omega: Option<f64>,
    k: Option<f64>,
    n: Option<usize>,
    tol_kernel: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let (f, r, at) = resolve(family, r, omega, k)?;
    let params = waves::solve(f, r, at).map_err(to_py)?;
    let rep = py.detach(|| spectral::spectrum_report(&params, n, tol_kernel)).map_err(to_py)?;
    to_dict(py, &rep)
}

#[pyfunction]
#[pyo3(signature = (family, k, r=None))]
fn theta(family: &str, k: f64, r: Option<u32>) -> PyResult<f64> {
    let (f, r, at) = resolve(family, r, None, Some(k))?;
    let params = waves::solve(f, r, at).map_err(to_py)?;
    spectral::floquet_theta(&params).map(|t| t.theta).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (family, r=None, *, omega=None, k=None, step=DEFAULT_STEP))]
fn vk_slope<'py>(
    py: Python<'py>,
    family: &str,
    r: Option<u32>,
    omega: Option<f64>,
    k: Option<f64>,
    step: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let (f, r, at) = resolve(family, r, omega, k)?;
    let s = functionals::vk_slope(f, r, at, step).map_err(to_py)?;
    let d = to_dict(py, &s)?;
    d.set_item("sign", report::SlopeSign::classify(s.slope, s.richardson_error).to_string())?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (family, r=None, *, omega=None, k=None, n=None, tol_kernel=None, step=DEFAULT_STEP))]
#[allow(clippy::too_many_arguments)]
fn verdict<'py>(
    py: Python<'py>,
    family: &str,
    r: Option<u32>,
    omega: Option<f64>,
    k: Option<f64>,
    n: Option<usize>,
    tol_kernel: Option<f64>,
    step: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let (f, r, at) = resolve(family, r, omega, k)?;
    let opts = VerdictOptions { n, tol_kernel, step };
    let v = py.detach(|| report::verdict_with(f, r, at, &opts));
    let d = to_dict(py, &v)?;
    // the raw spectra are large; keep the summary
    if let Ok(dict) = d.cast::<PyDict>() {
        dict.del_item("spectrum").ok();
    }
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (family, r=None, *, omega=None, k=None, epsilon=1e-2, t_final=20.0, dt=1e-3, n=None, even=false, log_every=50))]
#[allow(clippy::too_many_arguments)]
fn stability_experiment<'py>(
    py: Python<'py>,
    family: &str,
    r: Option<u32>,
    omega: Option<f64>,
    k: Option<f64>,
    epsilon: f64,
    t_final: f64,
    dt: f64,
    n: Option<usize>,
    even: bool,
    log_every: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let (f, r, at) = resolve(family, r, omega, k)?;
    let mut spec = ExperimentSpec::new(f, r, at, epsilon, t_final);
    if even {
        spec = spec.even();
    }
    spec.dt = dt;
    spec.n = n;
    spec.log_every = log_every;
    let res = py.detach(|| evolution::stability_experiment(&spec)).map_err(to_py)?;
    let d = to_dict(py, &evolution::manifest(&res))?;
    d.set_item("records", to_dict(py, &res.summary.records)?)?;
    Ok(d)
}

#[pyfunction]
fn elliptic_k(k: f64) -> PyResult<f64> {
    elliptic::complete_k(k).map_err(to_py)
}

#[pyfunction]
fn elliptic_e(k: f64) -> PyResult<f64> {
    elliptic::complete_e(k).map_err(to_py)
}

/// `(sn, cn, dn)` at `u` for modulus `k`.
#[pyfunction]
fn jacobi(u: f64, k: f64) -> PyResult<(f64, f64, f64)> {
    elliptic::jacobi(u, k).map(|j| (j.sn, j.cn, j.dn)).map_err(to_py)
}

#[pyfunction]
fn figures<'py>(py: Python<'py>, out_dir: &str) -> PyResult<Bound<'py, PyAny>> {
    let files = report::reproduce_figures(std::path::Path::new(out_dir)).map_err(to_py)?;
    to_dict(py, &files)
}

#[pymodule]
fn skwaves(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DomainError", m.py().get_type::<DomainError>())?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_class::<PyWaveParams>()?;
    m.add_class::<PyProfile>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(build_profile, m)?)?;
    m.add_function(wrap_pyfunction!(solitary_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(theta, m)?)?;
    m.add_function(wrap_pyfunction!(vk_slope, m)?)?;
    m.add_function(wrap_pyfunction!(verdict, m)?)?;
    m.add_function(wrap_pyfunction!(stability_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(elliptic_k, m)?)?;
    m.add_function(wrap_pyfunction!(elliptic_e, m)?)?;
    m.add_function(wrap_pyfunction!(jacobi, m)?)?;
    m.add_function(wrap_pyfunction!(figures, m)?)?;
    Ok(())
}
