//! Python bindings: grids, states, Gramians, integration, reconstruction
//! helpers and the experiment battery.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use wave_observe::dynamics::{self, Nonlinearity, TimeGrid, WaveSystem};
use wave_observe::experiments::ExperimentResult;
use wave_observe::observability::{self, BumpFunction, Gramian, ObservationWindow, Subspace};
use wave_observe::reconstruction;
use wave_observe::spectral::{self, SpectralGrid, State};
use wave_observe::{plate, suite, Error};

create_exception!(wave_observe, NumericalError, PyRuntimeError, "Divergence, singular Gramian or other numerical failure.");

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter(_) | Error::IndexOutOfRange { .. } | Error::CutoffOutOfRange { .. } | Error::SizeMismatch { .. } | Error::GridMismatch(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => NumericalError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for wave_observe::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

#[pyclass(name = "SpectralGrid", module = "wave_observe", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGrid(SpectralGrid);

#[pymethods]
impl PyGrid {
    #[new]
    #[pyo3(signature = (length, n, beta = 0.0, quad_points = None))]
    fn new(length: f64, n: usize, beta: f64, quad_points: Option<usize>) -> PyResult<Self> {
        match quad_points {
            Some(q) => SpectralGrid::with_quad_points(length, n, q, beta),
            None => SpectralGrid::new(length, n, beta),
        }
        .map(Self)
        .py_err()
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn length(&self) -> f64 {
        self.0.length()
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.0.beta()
    }

    #[getter]
    fn eigenvalues(&self) -> Vec<f64> {
        self.0.eigenvalues().to_vec()
    }

    #[getter]
    fn nodes(&self) -> Vec<f64> {
        self.0.nodes().to_vec()
    }

    fn to_physical(&self, coeffs: Vec<f64>) -> PyResult<Vec<f64>> {
        self.0.to_physical(&coeffs).py_err()
    }

    fn to_coeffs(&self, samples: Vec<f64>) -> PyResult<Vec<f64>> {
        self.0.to_coeffs(&samples).py_err()
    }

    fn __repr__(&self) -> String {
        format!("SpectralGrid(length={}, n={}, beta={})", self.0.length(), self.0.n(), self.0.beta())
    }
}

#[pyclass(name = "State", module = "wave_observe", frozen, from_py_object)]
#[derive(Clone)]
struct PyState(State);

#[pymethods]
impl PyState {
    #[new]
    fn new(u: Vec<f64>, v: Vec<f64>) -> PyResult<Self> {
        State::new(u, v).map(Self).py_err()
    }

    /// Unit displacement in mode j (1-based).
    #[staticmethod]
    fn mode(n: usize, j: usize) -> PyResult<Self> {
        State::mode(n, j).map(Self).py_err()
    }

    #[getter]
    fn u(&self) -> Vec<f64> {
        self.0.u.clone()
    }

    #[getter]
    fn v(&self) -> Vec<f64> {
        self.0.v.clone()
    }

    fn norm(&self, grid: &PyGrid, sigma: f64) -> f64 {
        spectral::norm_x_sigma(&self.0, &grid.0, sigma)
    }

    fn project_low(&self, n: usize) -> PyResult<Self> {
        spectral::project_low(&self.0, n).map(Self).py_err()
    }

    fn project_high(&self, n: usize) -> PyResult<Self> {
        spectral::project_high(&self.0, n).map(Self).py_err()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("State(n={})", self.0.len())
    }
}

#[pyclass(name = "TimeGrid", module = "wave_observe", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyTimeGrid(TimeGrid);

#[pymethods]
impl PyTimeGrid {
    #[new]
    fn new(t: f64, m: usize) -> PyResult<Self> {
        TimeGrid::new(t, m).map(Self).py_err()
    }

    #[getter]
    fn t(&self) -> f64 {
        self.0.t
    }

    #[getter]
    fn m(&self) -> usize {
        self.0.m
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.0.dt()
    }

    fn times(&self) -> Vec<f64> {
        self.0.times()
    }
}

#[pyclass(name = "Nonlinearity", module = "wave_observe", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyNonlinearity(Nonlinearity);

#[pymethods]
impl PyNonlinearity {
    /// coeffs[k] multiplies u^(k+1).
    #[new]
    fn new(coeffs: Vec<f64>) -> PyResult<Self> {
        Nonlinearity::new(coeffs).map(Self).py_err()
    }

    #[staticmethod]
    fn cubic() -> Self {
        Self(Nonlinearity::cubic())
    }

    #[staticmethod]
    fn double_well(a: f64, b: f64) -> Self {
        Self(Nonlinearity::double_well(a, b))
    }

    fn __call__(&self, u: f64) -> f64 {
        self.0.eval(u)
    }

    #[getter]
    fn coeffs(&self) -> Vec<f64> {
        self.0.coeffs().to_vec()
    }
}

#[pyclass(name = "BumpFunction", module = "wave_observe", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyBump(BumpFunction);

#[pymethods]
impl PyBump {
    /// Smooth cutoff equal to 1 on each interval shrunk by the plateau margin.
    #[staticmethod]
    fn from_window(intervals: Vec<(f64, f64)>, plateau_margin: f64, grid: &PyGrid) -> PyResult<Self> {
        let w = ObservationWindow::new(intervals, plateau_margin, grid.0.length()).py_err()?;
        Ok(Self(BumpFunction::from_window(&w, &grid.0)))
    }

    #[staticmethod]
    fn constant(grid: &PyGrid, value: f64) -> PyResult<Self> {
        BumpFunction::constant(&grid.0, value).map(Self).py_err()
    }

    #[getter]
    fn samples(&self) -> Vec<f64> {
        self.0.samples().to_vec()
    }
}

#[pyclass(name = "Gramian", module = "wave_observe", frozen)]
struct PyGramian(Gramian);

#[pymethods]
impl PyGramian {
    #[getter]
    fn lambda_min(&self) -> f64 {
        self.0.lambda_min
    }

    #[getter]
    fn lambda_max(&self) -> f64 {
        self.0.lambda_max
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.0.sigma
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn is_observable(&self) -> bool {
        self.0.is_observable()
    }

    fn obs_constant(&self) -> Option<f64> {
        self.0.obs_constant()
    }

    /// Row-major matrix entries.
    fn matrix(&self) -> Vec<Vec<f64>> {
        let m = &self.0.matrix;
        (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
    }

    fn eigenvalues(&self) -> Vec<f64> {
        self.0.eigenvalues().iter().copied().collect()
    }

    /// G^+ applied to the observation of the given trajectory.
    fn pseudo_inverse_of(&self, states: Vec<PyState>) -> PyResult<PyState> {
        let states: Vec<State> = states.into_iter().map(|s| s.0).collect();
        let tg = *self.0.time_grid();
        let sig = observability::ObservationSignal::record(&states, tg, self.0.observation_matrix()).py_err()?;
        observability::pseudo_inverse_apply(&self.0, &sig).map(PyState).py_err()
    }
}

#[pyclass(name = "ExperimentResult", module = "wave_observe", frozen)]
struct PyExperiment(ExperimentResult);

#[pymethods]
impl PyExperiment {
    #[getter]
    fn name(&self) -> String {
        self.0.name.clone()
    }

    #[getter]
    fn scalars(&self) -> Vec<(String, f64)> {
        self.0.scalars.clone()
    }

    #[getter]
    fn series(&self) -> Vec<(String, Vec<f64>)> {
        self.0.series.clone()
    }

    /// (name, value, threshold, passes) per check.
    #[getter]
    fn checks(&self) -> Vec<(String, f64, f64, bool)> {
        self.0.checks.iter().map(|c| (c.name.clone(), c.value, c.threshold, c.passes())).collect()
    }

    fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name)
    }

    fn verdict(&self) -> bool {
        self.0.verdict()
    }

    fn csv(&self) -> String {
        suite::result_csv(&self.0)
    }

    fn __repr__(&self) -> String {
        suite::summary_line(&self.0)
    }
}

fn system(grid: &PyGrid, f: Option<&PyNonlinearity>) -> WaveSystem {
    WaveSystem::uniform(grid.0.clone(), f.map_or_else(Nonlinearity::zero, |f| f.0.clone()))
}

#[pyfunction]
fn linear_propagate(state: &PyState, t: f64, grid: &PyGrid) -> PyState {
    PyState(dynamics::linear_propagate(&state.0, t, &grid.0))
}

/// Trajectory of the semilinear wave equation on every node of the time grid.
#[pyfunction]
#[pyo3(signature = (u0, grid, time_grid, f = None))]
fn integrate(py: Python<'_>, u0: &PyState, grid: &PyGrid, time_grid: &PyTimeGrid, f: Option<&PyNonlinearity>) -> PyResult<Vec<PyState>> {
    let sys = system(grid, f);
    let traj = py.detach(|| dynamics::integrate(&u0.0, &sys, &time_grid.0)).py_err()?;
    Ok(traj.states.into_iter().map(PyState).collect())
}

#[pyfunction]
#[pyo3(signature = (state, grid, f = None))]
fn energy(state: &PyState, grid: &PyGrid, f: Option<&PyNonlinearity>) -> f64 {
    dynamics::energy(&state.0, &system(grid, f))
}

/// Gramian on the full space (n = None) or on modes above n.
#[pyfunction]
#[pyo3(signature = (grid, bump, time_grid, sigma, n = None))]
fn assemble_gramian(py: Python<'_>, grid: &PyGrid, bump: &PyBump, time_grid: &PyTimeGrid, sigma: f64, n: Option<usize>) -> PyResult<PyGramian> {
    let subspace = n.map_or(Subspace::Full, Subspace::High);
    py.detach(|| observability::assemble_gramian(&grid.0, &bump.0, &time_grid.0, sigma, subspace)).map(PyGramian).py_err()
}

#[pyfunction]
#[pyo3(signature = (intervals, length, plateau_margin = 0.2))]
fn gcc_time(py: Python<'_>, intervals: Vec<(f64, f64)>, length: f64, plateau_margin: f64) -> PyResult<f64> {
    let w = ObservationWindow::new(intervals, plateau_margin, length).py_err()?;
    py.detach(|| observability::gcc_time(&w, length)).py_err()
}

#[pyfunction]
fn commutator_check(bump: &PyBump, grid: &PyGrid, sigma: f64, epsilon: f64) -> PyResult<f64> {
    observability::commutator_check(&bump.0, &grid.0, sigma, epsilon).py_err()
}

/// (n, overflow) for the smallest n with C T (1 + lambda_{n+1})^-epsilon < 1.
#[pyfunction]
fn determining_threshold(c: f64, t: f64, epsilon: f64, grid: &PyGrid) -> PyResult<(usize, bool)> {
    reconstruction::determining_threshold(c, t, epsilon, &grid.0).map(|d| (d.n, d.overflow)).py_err()
}

#[pyfunction]
#[pyo3(signature = (grid, sigma, epsilon, radius, samples = reconstruction::LIPSCHITZ_SAMPLES, seed = 0, f = None))]
fn empirical_lipschitz(py: Python<'_>, grid: &PyGrid, sigma: f64, epsilon: f64, radius: f64, samples: usize, seed: u64, f: Option<&PyNonlinearity>) -> f64 {
    let sys = system(grid, f);
    py.detach(|| reconstruction::empirical_lipschitz(&sys, sigma, epsilon, radius, samples, seed))
}

/// Smallest eigenvalue of the Schroedinger Gramian on the time grid.
#[pyfunction]
fn schrodinger_lambda_min(py: Python<'_>, grid: &PyGrid, bump: &PyBump, time_grid: &PyTimeGrid) -> PyResult<f64> {
    py.detach(|| plate::schrodinger_gramian(&grid.0, &bump.0, &time_grid.0)).map(|g| g.lambda_min).py_err()
}

/// Smallest eigenvalue of the plate Gramian on the time grid.
#[pyfunction]
fn plate_lambda_min(py: Python<'_>, grid: &PyGrid, bump: &PyBump, time_grid: &PyTimeGrid) -> PyResult<f64> {
    py.detach(|| plate::plate_gramian(&grid.0, &bump.0, &time_grid.0)).map(|g| g.lambda_min).py_err()
}

#[pyfunction]
fn nonlinear_obs_ratio(
    py: Python<'_>,
    grid: &PyGrid,
    f: &PyNonlinearity,
    bump: &PyBump,
    time_grid: &PyTimeGrid,
    r0: f64,
    samples: usize,
    seed: u64,
) -> PyResult<PyExperiment> {
    let sys = system(grid, Some(f));
    py.detach(|| wave_observe::experiments::nonlinear_obs_ratio(&sys, &bump.0, &time_grid.0, r0, samples, seed)).map(PyExperiment).py_err()
}

/// Every acceptance experiment, in order.
#[pyfunction]
#[pyo3(signature = (seed = 42))]
fn run_suite(py: Python<'_>, seed: u64) -> PyResult<Vec<PyExperiment>> {
    let results = py.detach(|| suite::run_suite(seed)).py_err()?;
    Ok(results.into_iter().map(PyExperiment).collect())
}

#[pyfunction]
fn suite_csv(results: Vec<PyRef<'_, PyExperiment>>) -> String {
    let owned: Vec<ExperimentResult> = results.iter().map(|r| r.0.clone()).collect();
    suite::suite_csv(&owned)
}

#[pymodule]
#[pyo3(name = "wave_observe")]
fn wave_observe_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_class::<PyGrid>()?;
    m.add_class::<PyState>()?;
    m.add_class::<PyTimeGrid>()?;
    m.add_class::<PyNonlinearity>()?;
    m.add_class::<PyBump>()?;
    m.add_class::<PyGramian>()?;
    m.add_class::<PyExperiment>()?;
    m.add_function(wrap_pyfunction!(linear_propagate, m)?)?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(energy, m)?)?;
    m.add_function(wrap_pyfunction!(assemble_gramian, m)?)?;
    m.add_function(wrap_pyfunction!(gcc_time, m)?)?;
    m.add_function(wrap_pyfunction!(commutator_check, m)?)?;
    m.add_function(wrap_pyfunction!(determining_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_lipschitz, m)?)?;
    m.add_function(wrap_pyfunction!(schrodinger_lambda_min, m)?)?;
    m.add_function(wrap_pyfunction!(plate_lambda_min, m)?)?;
    m.add_function(wrap_pyfunction!(nonlinear_obs_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add_function(wrap_pyfunction!(suite_csv, m)?)?;
    Ok(())
}
