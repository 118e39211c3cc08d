//! Python bindings for the dipsq core crate.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use dipsq::dynamics::{self, Instant, WindowStatus};
use dipsq::error::{Error, ExitClass};
use dipsq::fock_oracle;
use dipsq::io;
use dipsq::lattice;
use dipsq::quantities::{
    self, CantileverParams, CrystalSetup, MoleculeSpecies, Occupation, PhysicalConstants, SingleMoleculeSetup,
};

const SI: PhysicalConstants = PhysicalConstants::SI;

fn py_err(e: Error) -> PyErr {
    match e.exit_class() {
        ExitClass::Io => PyIOError::new_err(e.to_string()),
        ExitClass::Parse | ExitClass::Validation => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn instant(t: Option<f64>, u: Option<f64>) -> PyResult<Instant> {
    match (t, u) {
        (Some(t), None) => Ok(Instant::Time(t)),
        (None, Some(u)) => Ok(Instant::Squeezing(u)),
        _ => Err(PyValueError::new_err("give exactly one of t or u")),
    }
}

/// A polar molecule species (SI units).
#[pyclass(name = "MoleculeSpecies", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySpecies(MoleculeSpecies);

#[pymethods]
impl PySpecies {
    #[new]
    fn new(name: &str, mass: f64, dipole: f64) -> PyResult<Self> {
        MoleculeSpecies::new(name, mass, dipole).map(PySpecies).map_err(py_err)
    }

    #[staticmethod]
    fn strontium_oxide() -> Self {
        PySpecies(MoleculeSpecies::strontium_oxide())
    }

    #[getter]
    fn name(&self) -> String {
        self.0.name.clone()
    }

    #[getter]
    fn mass(&self) -> f64 {
        self.0.mass
    }

    #[getter]
    fn dipole(&self) -> f64 {
        self.0.dipole
    }

    fn __repr__(&self) -> String {
        format!("MoleculeSpecies({:?}, mass={:e}, dipole={:e})", self.0.name, self.0.mass, self.0.dipole)
    }
}

/// Cantilever mode. Give the occupation either as `n_bar` or `temperature`.
#[pyclass(name = "Cantilever", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyCantilever(CantileverParams);

#[pymethods]
impl PyCantilever {
    #[new]
    #[pyo3(signature = (omega_c, mass, damping, dipole, n_bar=None, temperature=None))]
    fn new(
        omega_c: f64,
        mass: f64,
        damping: f64,
        dipole: f64,
        n_bar: Option<f64>,
        temperature: Option<f64>,
    ) -> PyResult<Self> {
        let occ = match (n_bar, temperature) {
            (Some(n), None) => Occupation::Quanta(n),
            (None, Some(t)) => Occupation::Temperature(t),
            _ => return Err(PyValueError::new_err("give exactly one of n_bar or temperature")),
        };
        CantileverParams::new(omega_c, mass, damping, dipole, occ).map(PyCantilever).map_err(py_err)
    }

    #[getter]
    fn omega_c(&self) -> f64 {
        self.0.omega_c
    }

    #[getter]
    fn damping(&self) -> f64 {
        self.0.damping
    }

    /// Mean phonon number of the driven mode.
    fn n_bar(&self) -> f64 {
        quantities::thermal_occupation(&SI, &self.0)
    }
}

/// Shifted trap frequency ω_t′ of one molecule at distance `distance`.
#[pyfunction]
fn shifted_trap_frequency(species: &PySpecies, trap_omega: f64, distance: f64, cantilever: &PyCantilever) -> PyResult<f64> {
    let s = SingleMoleculeSetup::new(species.0.clone(), trap_omega, distance).map_err(py_err)?;
    Ok(quantities::shifted_trap_frequency(&SI, &s, &cantilever.0))
}

/// Single-mode squeezing coupling C (1/s).
#[pyfunction]
fn single_mode_coupling(species: &PySpecies, trap_omega: f64, distance: f64, cantilever: &PyCantilever) -> PyResult<f64> {
    let s = SingleMoleculeSetup::new(species.0.clone(), trap_omega, distance).map_err(py_err)?;
    quantities::single_mode_coupling(&SI, &s, &cantilever.0).map_err(py_err)
}

/// Phonon dispersion ω(k) of a crystal with the given spacing.
#[pyfunction]
fn phonon_dispersion(species: &PySpecies, spacing: f64, count: usize, k: f64) -> PyResult<f64> {
    let cr = CrystalSetup::new(species.0.clone(), spacing, count, 1.0, 0.0).map_err(py_err)?;
    quantities::phonon_dispersion(&SI, &cr, k).map_err(py_err)
}

/// Two-mode coupling `(c_k, c_k_prime)` for wavenumber `k`.
#[pyfunction]
fn two_mode_coupling(
    species: &PySpecies,
    spacing: f64,
    count: usize,
    distance: f64,
    cantilever: &PyCantilever,
    k: f64,
) -> PyResult<(f64, f64)> {
    let cr = CrystalSetup::new(species.0.clone(), spacing, count, distance, 0.0).map_err(py_err)?;
    let c = quantities::two_mode_coupling(&SI, &cr, &cantilever.0, k).map_err(py_err)?;
    Ok((c.c_k, c.c_k_prime))
}

/// Damped single-mode variance (Δx₁)² at time `t` or squeezing `u`.
#[pyfunction]
#[pyo3(signature = (coupling, damping, t=None, u=None))]
fn single_mode_variance(coupling: f64, damping: f64, t: Option<f64>, u: Option<f64>) -> PyResult<f64> {
    Ok(dynamics::single_mode_variance(coupling, damping, instant(t, u)?).map_err(py_err)?.variance)
}

/// Optimal squeezing `(u_star, t_star, min_variance)`.
#[pyfunction]
fn optimal_single_mode_squeezing(coupling: f64, damping: f64) -> PyResult<(f64, f64, f64)> {
    let o = dynamics::optimal_single_mode_squeezing(coupling, damping).map_err(py_err)?;
    Ok((o.u_star, o.t_star, o.min_variance))
}

/// Two-mode variance sum (Δs₁)² + (Δs₂)² at time `t` or squeezing `u`.
#[pyfunction]
#[pyo3(signature = (c_k, damping, t=None, u=None))]
fn two_mode_variance_sum(c_k: f64, damping: f64, t: Option<f64>, u: Option<f64>) -> PyResult<f64> {
    Ok(dynamics::two_mode_variance_sum(c_k, damping, instant(t, u)?).map_err(py_err)?.sum)
}

/// Two-mode sums at many times, sharing one root solve.
#[pyfunction]
fn two_mode_variance_sums(c_k: f64, damping: f64, times: Vec<f64>) -> PyResult<Vec<f64>> {
    let ev = dynamics::TwoModeEvaluator::new(c_k, damping).map_err(py_err)?;
    Ok(ev.at_times(&times).map_err(py_err)?.into_iter().map(|p| p.sum).collect())
}

/// Entanglement window `(status, t_enter, t_exit)`; status is one of
/// "bounded", "open-ended" or "empty".
#[pyfunction]
fn entanglement_window(c_k: f64, damping: f64) -> PyResult<(&'static str, Option<f64>, Option<f64>)> {
    let w = dynamics::entanglement_window(c_k, damping).map_err(py_err)?;
    let status = match w.status {
        WindowStatus::Bounded => "bounded",
        WindowStatus::OpenEnded => "open-ended",
        WindowStatus::Empty => "empty",
    };
    Ok((status, w.t_enter, w.t_exit))
}

/// Equilibrium positions (m) of `n` molecules in a harmonic trap.
#[pyfunction]
fn equilibrium_positions(species: &PySpecies, n: usize, trap_omega: f64) -> PyResult<Vec<f64>> {
    Ok(lattice::equilibrium_positions(&SI, n, &species.0, trap_omega).map_err(py_err)?.positions)
}

/// Trap frequency giving central spacing `spacing` for `n` molecules.
#[pyfunction]
fn trap_for_central_spacing(species: &PySpecies, n: usize, spacing: f64) -> PyResult<f64> {
    lattice::trap_for_central_spacing(&SI, n, &species.0, spacing).map_err(py_err)
}

/// Ascending normal-mode frequencies (rad/s) of the trapped chain.
#[pyfunction]
fn normal_mode_frequencies(species: &PySpecies, n: usize, trap_omega: f64) -> PyResult<Vec<f64>> {
    let c = lattice::equilibrium_positions(&SI, n, &species.0, trap_omega).map_err(py_err)?;
    Ok(lattice::hessian_modes(&SI, &c).map_err(py_err)?.frequencies)
}

/// Truncated Fock-space squeezing from vacuum. Returns the quadrature
/// variance (x₁ for one mode, s₁ + s₂ for two) and the mean occupation.
#[pyfunction]
#[pyo3(signature = (coupling, t, n_max, two_mode=false))]
fn fock_evolve(coupling: f64, t: f64, n_max: usize, two_mode: bool) -> PyResult<(f64, f64)> {
    let state = if two_mode {
        fock_oracle::evolve_two_mode(coupling, t, n_max)
    } else {
        fock_oracle::evolve_single_mode(coupling, t, n_max)
    }
    .map_err(py_err)?;
    state.check_cutoff().map_err(py_err)?;
    let v = fock_oracle::quadrature_variance(&state).total();
    Ok((v, fock_oracle::mean_occupations(&state).0))
}

/// Result of a profile or config run.
#[pyclass(name = "RunOutput", frozen)]
struct PyRunOutput(io::RunOutput);

#[pymethods]
impl PyRunOutput {
    /// File names of the CSV traces.
    fn trace_names(&self) -> Vec<String> {
        self.0.traces.iter().map(|t| t.file_name.clone()).collect()
    }

    /// Column of a trace, or None.
    fn column(&self, trace: &str, name: &str) -> Option<Vec<f64>> {
        self.0.trace(trace)?.column(name).map(|c| c.to_vec())
    }

    fn summary(&self) -> Vec<String> {
        self.0.summary.clone()
    }

    #[getter]
    fn cutoff_limited(&self) -> bool {
        self.0.cutoff_limited
    }

    /// Write every output file into `dir`; returns the written paths.
    fn write(&self, dir: PathBuf) -> PyResult<Vec<PathBuf>> {
        self.0.write(&dir).map_err(py_err)
    }
}

/// Names of the built-in profiles.
#[pyfunction]
fn list_profiles() -> Vec<&'static str> {
    io::PROFILES.iter().map(|(n, _, _)| *n).collect()
}

/// Run a built-in profile.
#[pyfunction]
fn run_profile(name: &str) -> PyResult<PyRunOutput> {
    let cfg = io::profile(name).map_err(py_err)?;
    io::run_scenario(&cfg).map(PyRunOutput).map_err(py_err)
}

/// Run from configuration text.
#[pyfunction]
fn run_config(text: &str) -> PyResult<PyRunOutput> {
    let cfg = io::parse_config(text).map_err(py_err)?;
    io::run_scenario(&cfg).map(PyRunOutput).map_err(py_err)
}

#[pymodule]
fn dipsq_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpecies>()?;
    m.add_class::<PyCantilever>()?;
    m.add_class::<PyRunOutput>()?;
    m.add_function(wrap_pyfunction!(shifted_trap_frequency, m)?)?;
    m.add_function(wrap_pyfunction!(single_mode_coupling, m)?)?;
    m.add_function(wrap_pyfunction!(phonon_dispersion, m)?)?;
    m.add_function(wrap_pyfunction!(two_mode_coupling, m)?)?;
    m.add_function(wrap_pyfunction!(single_mode_variance, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_single_mode_squeezing, m)?)?;
    m.add_function(wrap_pyfunction!(two_mode_variance_sum, m)?)?;
    m.add_function(wrap_pyfunction!(two_mode_variance_sums, m)?)?;
    m.add_function(wrap_pyfunction!(entanglement_window, m)?)?;
    m.add_function(wrap_pyfunction!(equilibrium_positions, m)?)?;
    m.add_function(wrap_pyfunction!(trap_for_central_spacing, m)?)?;
    m.add_function(wrap_pyfunction!(normal_mode_frequencies, m)?)?;
    m.add_function(wrap_pyfunction!(fock_evolve, m)?)?;
    m.add_function(wrap_pyfunction!(list_profiles, m)?)?;
    m.add_function(wrap_pyfunction!(run_profile, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    Ok(())
}
