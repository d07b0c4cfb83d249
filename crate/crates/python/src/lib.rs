//! Python bindings for `walkfit`.
//!
//! Trajectories and moment curves are exposed as classes; fit and
//! classification reports come back as plain dicts with the same layout as
//! the CLI's JSON output.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use walkfit::{
    DataMeta, EnsembleSpec, FitConfig, IsParams, LagGrid, LwParams, ModelKind, ModelParams, PhaseLabel,
};

fn to_py(e: walkfit::Error) -> PyErr {
    if e.is_input_error() {
        PyValueError::new_err(e.to_string())
    } else {
        PyOSError::new_err(e.to_string())
    }
}

fn json_to_dict<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyDict>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))?.cast_into::<PyDict>().map_err(Into::into)
}

fn parse_config(config: Option<&str>) -> PyResult<FitConfig> {
    match config {
        Some(text) => serde_json::from_str(text).map_err(|e| PyValueError::new_err(format!("invalid fit config: {e}"))),
        None => Ok(FitConfig::default()),
    }
}

fn parse_kind(model: &str) -> PyResult<ModelKind> {
    match model.to_ascii_lowercase().as_str() {
        "is" | "intermittent" => Ok(ModelKind::Intermittent),
        "lw" | "levy" => Ok(ModelKind::Levy),
        other => Err(PyValueError::new_err(format!("unknown model {other:?}; expected 'is' or 'levy'"))),
    }
}

fn parse_phase(phase: Option<&str>) -> PyResult<Option<PhaseLabel>> {
    match phase {
        None => Ok(None),
        Some("ballistic") => Ok(Some(PhaseLabel::Ballistic)),
        Some("diffusive") => Ok(Some(PhaseLabel::Diffusive)),
        Some(other) => Err(PyValueError::new_err(format!("unknown phase {other:?}"))),
    }
}

fn grid_for(traj: &walkfit::Trajectory, lags: Option<usize>) -> PyResult<LagGrid> {
    match lags {
        Some(count) => LagGrid::log_spaced(traj.dt(), traj.n_steps(), count),
        None => LagGrid::default_for(traj),
    }
    .map_err(to_py)
}

/// A uniformly sampled planar trajectory.
#[pyclass(name = "Trajectory", module = "walkfit_py", frozen, from_py_object)]
#[derive(Clone)]
struct PyTrajectory(walkfit::Trajectory);

#[pymethods]
impl PyTrajectory {
    #[new]
    #[pyo3(signature = (xs, ys, dt=1.0))]
    fn new(xs: Vec<f64>, ys: Vec<f64>, dt: f64) -> PyResult<Self> {
        walkfit::Trajectory::new(dt, xs, ys).map(Self).map_err(to_py)
    }

    /// Reads a `t,x,y` CSV file.
    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        walkfit::io::read_trajectory(path).map(Self).map_err(to_py)
    }

    fn write(&self, path: &str) -> PyResult<()> {
        walkfit::io::write_trajectory(&self.0, path).map_err(to_py)
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.0.dt()
    }

    #[getter]
    fn xs(&self) -> Vec<f64> {
        self.0.xs().to_vec()
    }

    #[getter]
    fn ys(&self) -> Vec<f64> {
        self.0.ys().to_vec()
    }

    #[getter]
    fn n_steps(&self) -> usize {
        self.0.n_steps()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("Trajectory(n_steps={}, dt={})", self.0.n_steps(), self.0.dt())
    }
}

/// Second and fourth velocity moments over a lag grid.
#[pyclass(name = "MomentCurve", module = "walkfit_py", frozen, from_py_object)]
#[derive(Clone)]
struct PyMomentCurve(walkfit::MomentCurve);

#[pymethods]
impl PyMomentCurve {
    #[getter]
    fn lags(&self) -> Vec<f64> {
        self.0.lags.times()
    }

    #[getter]
    fn lag_steps(&self) -> Vec<usize> {
        self.0.lags.steps().to_vec()
    }

    #[getter]
    fn m2(&self) -> Vec<f64> {
        self.0.m2.clone()
    }

    #[getter]
    fn m4(&self) -> Vec<f64> {
        self.0.m4.clone()
    }

    #[getter]
    fn n_pairs(&self) -> Vec<u64> {
        self.0.n_pairs.clone()
    }

    fn write(&self, path: &str) -> PyResult<()> {
        walkfit::io::write_moments(&self.0, path).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("MomentCurve(lags={})", self.0.len())
    }
}

#[pyfunction]
#[pyo3(signature = (D, vb, lbd, ldb, n_steps, seed, dt=1.0, initial_phase=None))]
#[allow(non_snake_case)]
fn simulate_is(
    py: Python<'_>,
    D: f64,
    vb: f64,
    lbd: f64,
    ldb: f64,
    n_steps: usize,
    seed: u64,
    dt: f64,
    initial_phase: Option<&str>,
) -> PyResult<PyTrajectory> {
    let p = IsParams::new(D, vb, lbd, ldb).map_err(to_py)?;
    let phase = parse_phase(initial_phase)?;
    py.detach(|| walkfit::simulate_intermittent(&p, n_steps, dt, seed, phase))
        .map(PyTrajectory)
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (tau0, gamma, v, n_steps, seed, dt=1.0))]
fn simulate_levy(py: Python<'_>, tau0: f64, gamma: f64, v: f64, n_steps: usize, seed: u64, dt: f64) -> PyResult<PyTrajectory> {
    let p = LwParams::new(tau0, gamma, v).map_err(to_py)?;
    py.detach(|| walkfit::simulate_levy(&p, n_steps, dt, seed)).map(PyTrajectory).map_err(to_py)
}

/// Empirical moments; `lags` is the number of log-spaced lags (default grid when omitted).
#[pyfunction]
#[pyo3(signature = (traj, lags=None))]
fn empirical_moments(py: Python<'_>, traj: &PyTrajectory, lags: Option<usize>) -> PyResult<PyMomentCurve> {
    let grid = grid_for(&traj.0, lags)?;
    py.detach(|| walkfit::empirical_moments(&traj.0, &grid)).map(PyMomentCurve).map_err(to_py)
}

/// Ensemble-averaged model moments at integer lag steps.
#[pyfunction]
#[pyo3(signature = (model, params, lag_steps, n_steps, seed, ensemble_size=64, dt=1.0))]
#[allow(clippy::too_many_arguments)]
fn model_moments(
    py: Python<'_>,
    model: &str,
    params: Vec<f64>,
    lag_steps: Vec<usize>,
    n_steps: usize,
    seed: u64,
    ensemble_size: usize,
    dt: f64,
) -> PyResult<PyMomentCurve> {
    let m: ModelParams = parse_kind(model)?.params_from(&params).map_err(to_py)?;
    let grid = LagGrid::from_steps(dt, lag_steps).map_err(to_py)?;
    let ensemble = EnsembleSpec {
        size: ensemble_size,
        n_steps,
        seed,
    };
    py.detach(|| walkfit::model_moments(&m, &grid, &ensemble, dt, None)).map(PyMomentCurve).map_err(to_py)
}

/// Fits one model family to a moment curve. `config` is a JSON fit config.
#[pyfunction]
#[pyo3(signature = (model, curve, n_steps, seed, config=None))]
fn fit_model<'py>(
    py: Python<'py>,
    model: &str,
    curve: &PyMomentCurve,
    n_steps: usize,
    seed: u64,
    config: Option<&str>,
) -> PyResult<Bound<'py, PyDict>> {
    let kind = parse_kind(model)?;
    let cfg = parse_config(config)?;
    let meta = DataMeta {
        dt: curve.0.lags.dt(),
        n_steps,
    };
    let report = py.detach(|| walkfit::fit_model(kind, &curve.0, meta, &cfg, seed)).map_err(to_py)?;
    json_to_dict(py, &report)
}

/// Fits both families and labels the trajectory by the sign of gamma.
#[pyfunction]
#[pyo3(signature = (traj, seed, lags=None, config=None))]
fn classify<'py>(
    py: Python<'py>,
    traj: &PyTrajectory,
    seed: u64,
    lags: Option<usize>,
    config: Option<&str>,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = parse_config(config)?;
    let grid = grid_for(&traj.0, lags)?;
    let report = py.detach(|| walkfit::classify_trajectory(&traj.0, &grid, &cfg, seed)).map_err(to_py)?;
    json_to_dict(py, &report)
}

#[pymodule]
fn walkfit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTrajectory>()?;
    m.add_class::<PyMomentCurve>()?;
    m.add_function(wrap_pyfunction!(simulate_is, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_levy, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_moments, m)?)?;
    m.add_function(wrap_pyfunction!(model_moments, m)?)?;
    m.add_function(wrap_pyfunction!(fit_model, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    Ok(())
}
