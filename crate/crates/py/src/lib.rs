//! Python bindings for `zs_tspec`.

use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;

use zs_tspec::fundsol::{fundamental_solution as solve, Method, SolveOptions};
use zs_tspec::hamiltonian::{propagate_x, PlaneWave};
use zs_tspec::potential::{SingleExpParams, CLASSIFY_TOL};
use zs_tspec::spectra::{self, Kind};
use zs_tspec::{Error, Mat2, PotentialField, PotentialType};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidInput(m) => PyValueError::new_err(m),
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        e => PyRuntimeError::new_err(e.to_string()),
    }
}

fn rows(m: Mat2) -> [[Complex64; 2]; 2] {
    [[m.0[0], m.0[1]], [m.0[2], m.0[3]]]
}

fn kind_of(s: &str) -> PyResult<Kind> {
    Kind::parse(s).map_err(to_py)
}

fn potential_type(s: &str) -> PyResult<PotentialType> {
    match s {
        "real" => Ok(PotentialType::RealType),
        "imaginary" => Ok(PotentialType::ImaginaryType),
        "general" => Ok(PotentialType::General),
        _ => Err(PyValueError::new_err(format!("unknown potential type '{s}'"))),
    }
}

/// Four-component trigonometric polynomial potential of period 1.
#[pyclass(name = "Potential", module = "zs_tspec_py", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyPotential {
    inner: zs_tspec::Potential,
}

#[pymethods]
impl PyPotential {
    #[staticmethod]
    #[pyo3(signature = (k = 1))]
    fn zero(k: usize) -> Self {
        PyPotential { inner: zs_tspec::Potential::zero(k) }
    }

    /// `(alpha e^{i w t}, sigma conj(alpha) e^{-i w t}, c e^{i w t}, sigma conj(c) e^{-i w t})`
    #[staticmethod]
    #[pyo3(signature = (sigma, omega, alpha, c, k = 16))]
    fn single_exp(sigma: f64, omega: f64, alpha: Complex64, c: Complex64, k: usize) -> PyResult<Self> {
        let inner = zs_tspec::Potential::single_exp(SingleExpParams::new(sigma, omega, alpha, c), k).map_err(to_py)?;
        Ok(PyPotential { inner })
    }

    #[staticmethod]
    fn figure(id: &str) -> PyResult<Self> {
        let (_, inner) = zs_tspec::figure::figure_potential(id).map_err(to_py)?;
        Ok(PyPotential { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (seed, k = 4, modes = 4, norm = 1.0, kind = "general"))]
    fn random(seed: u64, k: usize, modes: usize, norm: f64, kind: &str) -> PyResult<Self> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let kind = potential_type(kind)?;
        Ok(PyPotential { inner: zs_tspec::Potential::random(&mut rng, k, modes, norm, kind) })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyPotential { inner: zs_tspec::Potential::from_json_str(text).map_err(to_py)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    fn l2_norm(&self) -> f64 {
        self.inner.l2_norm()
    }

    /// `"real"`, `"imaginary"` or `"general"`.
    fn classify(&self) -> &'static str {
        match self.inner.classify(CLASSIFY_TOL) {
            PotentialType::RealType => "real",
            PotentialType::ImaginaryType => "imaginary",
            PotentialType::General => "general",
        }
    }

    fn __call__(&self, t: f64) -> [Complex64; 4] {
        self.inner.eval(t)
    }

    fn __repr__(&self) -> String {
        format!("Potential(k={}, l2_norm={:.6})", self.inner.k(), self.inner.l2_norm())
    }
}

/// `M(t)` as a nested 2x2 list.
#[pyfunction]
#[pyo3(signature = (psi, lam, t = 1.0, method = "ode", tol = 1e-10))]
fn fundamental_solution(
    psi: &PyPotential,
    lam: Complex64,
    t: f64,
    method: &str,
    tol: f64,
) -> PyResult<[[Complex64; 2]; 2]> {
    let method = match method {
        "ode" => Method::Ode,
        "picard" => Method::Picard,
        "auto" => Method::Auto,
        "closed" => Method::ClosedForm,
        _ => return Err(PyValueError::new_err(format!("unknown method '{method}'"))),
    };
    Ok(rows(solve(&psi.inner, lam, t, &SolveOptions::new(method, tol)).map_err(to_py)?.m))
}

#[pyfunction]
#[pyo3(signature = (psi, lam, tol = 1e-12))]
fn discriminant(psi: &PyPotential, lam: Complex64, tol: f64) -> PyResult<Complex64> {
    spectra::discriminant(&psi.inner, lam, tol).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (psi, lam, tol = 1e-12))]
fn anti_discriminant(psi: &PyPotential, lam: Complex64, tol: f64) -> PyResult<Complex64> {
    spectra::anti_discriminant(&psi.inner, lam, tol).map_err(to_py)
}

/// Located eigenvalues of one kind, as `(minimal_n, [dict, ...])`.
#[pyfunction]
#[pyo3(signature = (psi, kind = "periodic", n_max = 8, tol = 1e-12))]
fn spectrum<'py>(
    py: Python<'py>,
    psi: &PyPotential,
    kind: &str,
    n_max: usize,
    tol: f64,
) -> PyResult<(usize, Vec<Bound<'py, PyDict>>)> {
    let kind = kind_of(kind)?;
    let s = py.detach(|| spectra::locate_spectrum(kind, &psi.inner, n_max, tol)).map_err(to_py)?;
    let mut out = Vec::with_capacity(s.eigenvalues.len());
    for e in &s.eigenvalues {
        let d = PyDict::new(py);
        d.set_item("i", e.label.i)?;
        d.set_item("n", e.label.n)?;
        d.set_item("sign", e.label.sign.as_str())?;
        d.set_item("value", e.value)?;
        d.set_item("mult", e.multiplicity)?;
        d.set_item("residual", e.residual)?;
        out.push(d);
    }
    Ok((s.n, out))
}

/// Samples of the arc of `Im Delta = 0` through the real critical point labelled `n`.
#[pyfunction]
#[pyo3(signature = (psi, n = -1))]
fn trace_arc(psi: &PyPotential, n: i64) -> PyResult<(Complex64, Vec<Complex64>, Vec<f64>)> {
    let tracer = zs_tspec::zeroset::ArcTracer::new(&psi.inner, zs_tspec::zeroset::ZEROSET_TOL).map_err(to_py)?;
    let arc = tracer.trace_arc(n, zs_tspec::zeroset::MAX_STEPS).map_err(to_py)?;
    Ok((arc.crossing, arc.samples, arc.delta))
}

/// Gradient of `Delta(lambda)` on a uniform grid of `intervals + 1` points.
#[pyfunction]
#[pyo3(signature = (psi, lam, intervals = 256, tol = 1e-12))]
fn grad_discriminant(
    psi: &PyPotential,
    lam: Complex64,
    intervals: usize,
    tol: f64,
) -> PyResult<(Vec<f64>, [Vec<Complex64>; 4])> {
    let grid = zs_tspec::gradients::uniform_s_grid(intervals);
    let g = zs_tspec::gradients::grad_discriminant(&psi.inner, lam, &grid, tol).map_err(to_py)?;
    Ok((g.s, g.components))
}

/// Drift of the three conserved functionals along a plane-wave orbit.
#[pyfunction]
#[pyo3(signature = (sigma, alpha, xmax = 0.5, samples = 50, k = 4, tol = 1e-12))]
fn plane_wave_drift(sigma: f64, alpha: Complex64, xmax: f64, samples: usize, k: usize, tol: f64) -> PyResult<[f64; 3]> {
    let pw = PlaneWave::default_mode(sigma, alpha).map_err(to_py)?;
    let xs: Vec<f64> = (0..=samples.max(1)).map(|i| xmax * i as f64 / samples.max(1) as f64).collect();
    let tr = propagate_x(&pw.at(0.0, k).map_err(to_py)?, &xs, tol).map_err(to_py)?;
    Ok(tr.drift().drift)
}

/// Runs the named invariant suites (all when empty); returns `(passed, report_text)`.
#[pyfunction]
#[pyo3(signature = (suites = Vec::new()))]
fn validate(py: Python<'_>, suites: Vec<String>) -> PyResult<(bool, String)> {
    let r = py.detach(|| zs_tspec::validate::validate(&suites)).map_err(to_py)?;
    Ok((r.passed, r.to_text()))
}

#[pymodule]
fn zs_tspec_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPotential>()?;
    m.add_function(wrap_pyfunction!(fundamental_solution, m)?)?;
    m.add_function(wrap_pyfunction!(discriminant, m)?)?;
    m.add_function(wrap_pyfunction!(anti_discriminant, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(trace_arc, m)?)?;
    m.add_function(wrap_pyfunction!(grad_discriminant, m)?)?;
    m.add_function(wrap_pyfunction!(plane_wave_drift, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
