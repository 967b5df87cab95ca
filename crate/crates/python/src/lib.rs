//! Python bindings: `import viralfb`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use viralfb::classify;
use viralfb::model::{self, InitialData};
use viralfb::solver::{self, StepperConfig};
use viralfb::{spectral, steady};

fn to_py(e: viralfb::Error) -> PyErr {
    if e.is_validation() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

/// Model parameters of the free-boundary system.
#[pyclass(name = "ModelParams", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyModelParams {
    inner: model::ModelParams,
}

#[pymethods]
impl PyModelParams {
    #[new]
    #[pyo3(signature = (*, d, theta, a, b, c, k, q, mu, beta, h0))]
    #[allow(clippy::too_many_arguments)]
    fn new(d: f64, theta: f64, a: f64, b: f64, c: f64, k: f64, q: f64, mu: f64, beta: f64, h0: f64) -> PyResult<Self> {
        let inner = model::ModelParams::new(d, theta, a, b, c, k, q, mu, beta, h0).map_err(to_py)?;
        Ok(PyModelParams { inner })
    }

    #[getter]
    fn d(&self) -> f64 {
        self.inner.d
    }
    #[getter]
    fn theta(&self) -> f64 {
        self.inner.theta
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
    fn k(&self) -> f64 {
        self.inner.k
    }
    #[getter]
    fn q(&self) -> f64 {
        self.inner.q
    }
    #[getter]
    fn mu(&self) -> f64 {
        self.inner.mu
    }
    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }
    #[getter]
    fn h0(&self) -> f64 {
        self.inner.h0
    }

    fn r0(&self) -> f64 {
        self.inner.r0()
    }

    /// Critical width, or None when R0 <= 1.
    fn lambda_cap(&self) -> Option<f64> {
        self.inner.lambda_cap()
    }

    /// Critical diffusion, or None when R0 <= 1.
    fn d_cap(&self) -> Option<f64> {
        self.inner.d_cap()
    }

    /// Positive equilibrium (u*, v*, w*); ValueError when R0 <= 1.
    fn equilibrium(&self) -> PyResult<(f64, f64, f64)> {
        let e = model::equilibrium_full(&self.inner).map_err(to_py)?;
        Ok((e.u_star, e.v_star, e.w_star))
    }

    /// Copy with mu and beta scaled so that max(mu, beta) = gamma.
    fn with_gamma(&self, gamma: f64) -> PyResult<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(PyValueError::new_err("gamma must be positive"));
        }
        Ok(PyModelParams { inner: self.inner.with_gamma(gamma) })
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "ModelParams(d={}, theta={}, a={}, b={}, c={}, k={}, q={}, mu={}, beta={}, h0={})",
            p.d, p.theta, p.a, p.b, p.c, p.k, p.q, p.mu, p.beta, p.h0
        )
    }
}

fn cosine_data(p: &model::ModelParams, amplitude: f64, u0: Option<f64>) -> InitialData {
    InitialData::cosine(u0.unwrap_or(p.u_free()), amplitude, amplitude)
}

/// Principal eigenvalue of the linearization on (-l, l) with u frozen at m
/// (default theta/a).
#[pyfunction]
#[pyo3(signature = (params, l, m=None))]
fn principal_eigenvalue<'py>(py: Python<'py>, params: &PyModelParams, l: f64, m: Option<f64>) -> PyResult<Bound<'py, PyDict>> {
    let p = &params.inner;
    let m = m.unwrap_or(p.u_free());
    let r = spectral::eigen_for_model(m, p, -l, l).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("lambda1", r.lambda1)?;
    d.set_item("rho1", r.rho1)?;
    d.set_item("gamma_coeff", r.gamma_coeff)?;
    d.set_item("psi_scale", r.psi_scale)?;
    Ok(d)
}

/// Explicit vanishing bound for cosine initial data; `l=None` maximizes mu0.
#[pyfunction]
#[pyo3(signature = (params, amplitude=0.1, l=None, u0=None))]
fn certificate<'py>(
    py: Python<'py>,
    params: &PyModelParams,
    amplitude: f64,
    l: Option<f64>,
    u0: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let p = &params.inner;
    let init = cosine_data(p, amplitude, u0);
    let c = match l {
        Some(l) => classify::vanishing_certificate(p, &init, l),
        None => classify::optimal_certificate(p, &init),
    }
    .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("l", c.l)?;
    d.set_item("lambda1", c.lambda1)?;
    d.set_item("phi_t", c.phi_t)?;
    d.set_item("M", c.m)?;
    d.set_item("integral", c.integral)?;
    d.set_item("mu0", c.mu0)?;
    Ok(d)
}

/// Runs the simulation with cosine initial data. The result holds the
/// verdict, the time series as a list of (t, g, h, width, max_w, max_v,
/// u_center) tuples and the final centre triple.
#[pyfunction]
#[pyo3(signature = (params, amplitude=0.1, t_end=200.0, n_y=257, stop_on_decision=true, u0=None))]
fn simulate<'py>(
    py: Python<'py>,
    params: &PyModelParams,
    amplitude: f64,
    t_end: f64,
    n_y: usize,
    stop_on_decision: bool,
    u0: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let p = params.inner;
    let init = cosine_data(&p, amplitude, u0);
    let cfg = StepperConfig { t_end, n_y, stop_on_decision, ..Default::default() };
    let out = py.detach(|| solver::run(&p, &init, &cfg)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("verdict", out.classification.verdict.as_str())?;
    d.set_item("reason", format!("{:?}", out.classification.reason))?;
    d.set_item("t_decided", out.classification.t_decided)?;
    d.set_item("t_final", out.final_state.t)?;
    d.set_item("final_width", out.final_state.width())?;
    let [u, v, w] = out.diagnostics.center_triple;
    d.set_item("center_triple", (u, v, w))?;
    d.set_item("clip_count", out.diagnostics.clip_count)?;
    let series: Vec<(f64, f64, f64, f64, f64, f64, f64)> =
        out.series.iter().map(|r| (r.t, r.g, r.h, r.width, r.max_w, r.max_v, r.u_center)).collect();
    d.set_item("series", series)?;
    Ok(d)
}

/// Bisection on gamma for the sharp threshold; returns (mu_lo, mu_hi, flips).
#[pyfunction]
#[pyo3(signature = (params, lo, hi, rel_tol=0.05, amplitude=0.1, t_end=400.0))]
fn threshold_search(
    py: Python<'_>,
    params: &PyModelParams,
    lo: f64,
    hi: f64,
    rel_tol: f64,
    amplitude: f64,
    t_end: f64,
) -> PyResult<(f64, f64, usize)> {
    let p = params.inner;
    let init = cosine_data(&p, amplitude, None);
    let cfg = StepperConfig { t_end, ..Default::default() };
    let b = py.detach(|| classify::threshold_search(&p, &init, &cfg, lo, hi, rel_tol)).map_err(to_py)?;
    Ok((b.mu_lo, b.mu_hi, b.flips))
}

/// Positive Dirichlet steady state on (-l, l): (x, w) lists, or None when
/// only the zero solution exists.
#[pyfunction]
#[pyo3(signature = (params, l, m=None, n=401))]
fn steady_state(params: &PyModelParams, l: f64, m: Option<f64>, n: usize) -> PyResult<Option<(Vec<f64>, Vec<f64>)>> {
    let p = &params.inner;
    let m = m.unwrap_or(p.u_free());
    match steady::solve_dirichlet_bvp(m, p, l, n).map_err(to_py)? {
        steady::BvpOutcome::Solution(s) => Ok(Some((s.grid, s.w_vals))),
        steady::BvpOutcome::NoPositiveSolution { .. } => Ok(None),
    }
}

/// Final state (u, v, w) of the spatially homogeneous bilinear ODE.
#[pyfunction]
#[pyo3(signature = (params, start, t_end, dt=1e-3))]
fn ode_baseline(params: &PyModelParams, start: (f64, f64, f64), t_end: f64, dt: f64) -> PyResult<(f64, f64, f64)> {
    let traj = model::ode_baseline(&params.inner, [start.0, start.1, start.2], t_end, dt).map_err(to_py)?;
    let [u, v, w] = traj.last();
    Ok((u, v, w))
}

#[pymodule(name = "viralfb")]
fn viralfb_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelParams>()?;
    m.add_function(wrap_pyfunction!(principal_eigenvalue, m)?)?;
    m.add_function(wrap_pyfunction!(certificate, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_search, m)?)?;
    m.add_function(wrap_pyfunction!(steady_state, m)?)?;
    m.add_function(wrap_pyfunction!(ode_baseline, m)?)?;
    Ok(())
}
