//! Python bindings for the trispin core library.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use trispin::spectral::{self, Kink};
use trispin::trajectories::{self, Binning};
use trispin::{Convention, Error, ModelParams};

fn to_py(err: Error) -> PyErr {
    let msg = format!("{}: {err}", err.kind());
    if err.exit_code() == 2 {
        PyValueError::new_err(msg)
    } else {
        PyRuntimeError::new_err(msg)
    }
}

fn parse_convention(name: &str) -> PyResult<Convention> {
    match name {
        "unhalved" => Ok(Convention::Unhalved),
        "halved" => Ok(Convention::Halved),
        other => Err(PyValueError::new_err(format!(
            "convention must be 'unhalved' or 'halved' (got {other:?})"
        ))),
    }
}

/// Model parameters; validated on construction.
#[pyclass(name = "Model", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct Model {
    inner: ModelParams,
}

#[pymethods]
impl Model {
    #[new]
    #[pyo3(signature = (alpha=10.0, b_field=0.5, gamma_coll=0.05, gamma_single=0.0, nbar=0.0, convention="unhalved"))]
    fn new(
        alpha: f64,
        b_field: f64,
        gamma_coll: f64,
        gamma_single: f64,
        nbar: f64,
        convention: &str,
    ) -> PyResult<Self> {
        let conv = parse_convention(convention)?;
        let inner = ModelParams::new(alpha, b_field, gamma_coll, gamma_single, nbar, conv)
            .map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }
    #[getter]
    fn b_field(&self) -> f64 {
        self.inner.b_field
    }
    #[getter]
    fn gamma_coll(&self) -> f64 {
        self.inner.gamma_coll
    }
    #[getter]
    fn gamma_single(&self) -> f64 {
        self.inner.gamma_single
    }
    #[getter]
    fn nbar(&self) -> f64 {
        self.inner.nbar
    }
    #[getter]
    fn convention(&self) -> &'static str {
        self.inner.convention.as_str()
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "Model(alpha={}, b_field={}, gamma_coll={}, gamma_single={}, nbar={}, convention='{}')",
            p.alpha,
            p.b_field,
            p.gamma_coll,
            p.gamma_single,
            p.nbar,
            p.convention.as_str()
        )
    }
}

fn kink_dict<'py>(py: Python<'py>, k: &Kink) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("s_star", k.s_star)?;
    d.set_item("k_minus", k.k_minus)?;
    d.set_item("k_plus", k.k_plus)?;
    d.set_item("delta_k", k.delta_k)?;
    Ok(d)
}

/// Largest real eigenvalue θ(s) of the tilted generator.
#[pyfunction]
fn theta(py: Python<'_>, model: Model, s: f64) -> PyResult<f64> {
    py.detach(|| spectral::dynamical_free_energy(&model.inner, s))
        .map_err(to_py)
}

/// k(s) = −θ′(s) by perturbation theory ("hf"), a checked central
/// difference ("fd") or the refined difference ("fd_refined").
#[pyfunction]
#[pyo3(signature = (model, s, method="hf", h=spectral::DEFAULT_FD_STEP))]
fn activity(py: Python<'_>, model: Model, s: f64, method: &str, h: f64) -> PyResult<f64> {
    let p = model.inner;
    let res = match method {
        "hf" => py.detach(|| spectral::activity_hf(&p, s)),
        "fd" => py.detach(|| spectral::activity_fd(&p, s, h)),
        "fd_refined" => py.detach(|| spectral::activity_fd_refined(&p, s, h)),
        other => {
            return Err(PyValueError::new_err(format!(
                "method must be 'hf', 'fd' or 'fd_refined' (got {other:?})"
            )))
        }
    };
    res.map_err(to_py)
}

/// θ and k on a uniform grid, with detected kinks.
#[pyfunction]
#[pyo3(signature = (model, s_min=-1.0, s_max=1.0, n_points=101))]
fn scan<'py>(
    py: Python<'py>,
    model: Model,
    s_min: f64,
    s_max: f64,
    n_points: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let grid = spectral::uniform_grid(s_min, s_max, n_points);
    let res = py
        .detach(|| spectral::theta_scan(&model.inner, &grid))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("s", res.s_values)?;
    d.set_item("theta", res.theta)?;
    d.set_item("activity", res.activity)?;
    let kinks = res
        .kinks
        .iter()
        .map(|k| kink_dict(py, k))
        .collect::<PyResult<Vec<_>>>()?;
    d.set_item("kinks", kinks)?;
    Ok(d)
}

/// Basis of states annihilated by the collective lowering operator that are
/// also eigenstates of the Hamiltonian.
#[pyfunction]
fn dark_subspace<'py>(py: Python<'py>, model: Model) -> PyResult<Bound<'py, PyDict>> {
    let dark = py
        .detach(|| spectral::dark_subspace(&model.inner))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("dimension", dark.dimension)?;
    d.set_item("energies", dark.energies.clone())?;
    d.set_item("basis", dark.vectors())?;
    d.set_item("site1_lowering_min_sv", dark.site1_lowering_min_sv)?;
    d.set_item("site1_kernel_min_sv", dark.site1_kernel_min_sv)?;
    Ok(d)
}

/// Unique stationary density matrix as nested lists of complex numbers.
#[pyfunction]
fn steady_state(py: Python<'_>, model: Model) -> PyResult<Vec<Vec<num_complex::Complex64>>> {
    let ss = py
        .detach(|| spectral::steady_state(&model.inner))
        .map_err(to_py)?;
    let m = &ss.rho.matrix;
    Ok((0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect())
}

fn sample(
    py: Python<'_>,
    p: &ModelParams,
    n_trajectories: usize,
    n_jumps: usize,
    seed: u64,
) -> PyResult<Vec<trispin::JumpRecord>> {
    py.detach(|| {
        let stop = trajectories::matched_horizon(p, n_jumps)?;
        trajectories::sample_ensemble(p, n_trajectories, seed, stop)
    })
    .map_err(to_py)
}

/// Net activities of an ensemble run for a fixed horizon holding `n_jumps`
/// jumps on average, with summary statistics.
#[pyfunction]
#[pyo3(signature = (model, n_trajectories, n_jumps, seed, burn_in_fraction=0.1))]
fn ensemble<'py>(
    py: Python<'py>,
    model: Model,
    n_trajectories: usize,
    n_jumps: usize,
    seed: u64,
    burn_in_fraction: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let records = sample(py, &model.inner, n_trajectories, n_jumps, seed)?;
    let st = trajectories::ensemble_stats(&records, burn_in_fraction, Binning::FreedmanDiaconis)
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("activities", st.activities)?;
    d.set_item("mean", st.mean)?;
    d.set_item("std", st.std)?;
    d.set_item("std_error", st.std_error)?;
    d.set_item("zero_fraction", st.zero_fraction)?;
    d.set_item("active_mean", st.active_mean)?;
    d.set_item("bimodality", st.bimodality)?;
    d.set_item("modes", st.modes)?;
    d.set_item("histogram_edges", st.histogram.edges)?;
    d.set_item("histogram_counts", st.histogram.counts)?;
    Ok(d)
}

/// Windowed net-count statistics ln(p_K/p_{−K}) and their fitted slope.
#[pyfunction]
#[pyo3(signature = (model, n_trajectories, n_jumps, seed, window, k_max=6, burn_in_fraction=0.1))]
#[allow(clippy::too_many_arguments)]
fn fluctuation_theorem<'py>(
    py: Python<'py>,
    model: Model,
    n_trajectories: usize,
    n_jumps: usize,
    seed: u64,
    window: f64,
    k_max: i64,
    burn_in_fraction: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let records = sample(py, &model.inner, n_trajectories, n_jumps, seed)?;
    let ft = trajectories::empirical_ft(&records, k_max, window, burn_in_fraction).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("n_windows", ft.n_windows)?;
    d.set_item("k", ft.rows.iter().map(|r| r.k).collect::<Vec<_>>())?;
    d.set_item("log_ratio", ft.rows.iter().map(|r| r.log_ratio).collect::<Vec<_>>())?;
    d.set_item("count_pos", ft.rows.iter().map(|r| r.count_pos).collect::<Vec<_>>())?;
    d.set_item("count_neg", ft.rows.iter().map(|r| r.count_neg).collect::<Vec<_>>())?;
    d.set_item("omitted", ft.omitted)?;
    d.set_item("slope", ft.slope)?;
    d.set_item("slope_stderr", ft.slope_stderr)?;
    d.set_item("s0", ft.s0)?;
    Ok(d)
}

#[pymodule]
#[pyo3(name = "trispin")]
fn trispin_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(theta, m)?)?;
    m.add_function(wrap_pyfunction!(activity, m)?)?;
    m.add_function(wrap_pyfunction!(scan, m)?)?;
    m.add_function(wrap_pyfunction!(dark_subspace, m)?)?;
    m.add_function(wrap_pyfunction!(steady_state, m)?)?;
    m.add_function(wrap_pyfunction!(ensemble, m)?)?;
    m.add_function(wrap_pyfunction!(fluctuation_theorem, m)?)?;
    Ok(())
}
