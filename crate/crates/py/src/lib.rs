//! Python bindings: grids, spectral fields, the model presets, observers,
//! the synchronization-condition checker and the twin-experiment runner.
//!
//! Physical-space arrays cross the boundary as numpy arrays of shape
//! (n, n, n) (axes ordered z, y, x; x fastest) or (3, n, n, n) for vector
//! fields. Twin experiments accept the same TOML configuration text as the
//! command-line tool and return the synchronization series as numpy arrays.

use numpy::{IntoPyArray, PyArray1, PyArray3, PyArray4, PyReadonlyArray3, PyReadonlyArray4};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: adas_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(frozen)]
#[derive(Clone)]
struct Grid(adas_core::Grid);

#[pymethods]
impl Grid {
    #[new]
    #[pyo3(signature = (n, length, dealias_numerator=2, dealias_denominator=3))]
    fn new(n: usize, length: f64, dealias_numerator: u32, dealias_denominator: u32) -> PyResult<Self> {
        adas_core::Grid::with_dealias(n, length, dealias_numerator, dealias_denominator)
            .map(Self)
            .map_err(err)
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
    fn lambda1(&self) -> f64 {
        self.0.lambda1()
    }

    #[getter]
    fn dealias_cutoff(&self) -> usize {
        self.0.dealias_cutoff()
    }

    fn __repr__(&self) -> String {
        format!("Grid(n={}, length={})", self.0.n(), self.0.length())
    }
}

#[pyclass(frozen)]
#[derive(Clone)]
struct Model(adas_core::ModelSpec);

#[pymethods]
impl Model {
    #[staticmethod]
    fn nse(nu: f64) -> Self {
        Self(adas_core::ModelSpec::nse(nu))
    }

    #[staticmethod]
    fn leray_alpha(nu: f64, alpha: f64) -> Self {
        Self(adas_core::ModelSpec::leray_alpha(nu, alpha))
    }

    #[staticmethod]
    fn ml_alpha(nu: f64, alpha: f64) -> Self {
        Self(adas_core::ModelSpec::ml_alpha(nu, alpha))
    }

    #[staticmethod]
    fn sbm(nu: f64, alpha: f64) -> Self {
        Self(adas_core::ModelSpec::sbm(nu, alpha))
    }

    #[staticmethod]
    fn nsv(nu: f64, alpha: f64) -> Self {
        Self(adas_core::ModelSpec::nsv(nu, alpha))
    }

    #[staticmethod]
    fn ns_alpha(nu: f64, alpha: f64) -> Self {
        Self(adas_core::ModelSpec::ns_alpha(nu, alpha))
    }

    #[staticmethod]
    fn ns_alpha_like(nu: f64, alpha: f64, theta: f64, theta2: f64) -> Self {
        Self(adas_core::ModelSpec::ns_alpha_like(nu, alpha, theta, theta2))
    }

    fn validate(&self) -> PyResult<()> {
        self.0.validate().map_err(err)
    }

    #[getter]
    fn preset(&self) -> &'static str {
        self.0.preset.name()
    }

    #[getter]
    fn nu(&self) -> f64 {
        self.0.nu
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(preset={}, nu={}, alpha={})",
            self.0.preset.name(),
            self.0.nu,
            self.0.alpha
        )
    }
}

#[pyclass(frozen)]
#[derive(Clone)]
struct Observer(adas_core::Observer);

#[pymethods]
impl Observer {
    #[staticmethod]
    fn fourier_lowmode(h: f64, mask: [bool; 3]) -> Self {
        Self(adas_core::Observer::fourier_lowmode(h, mask))
    }

    #[staticmethod]
    fn volume_elements(h: f64, mask: [bool; 3]) -> Self {
        Self(adas_core::Observer::volume_elements(h, mask))
    }

    #[getter]
    fn h(&self) -> f64 {
        self.0.h
    }

    #[getter]
    fn mask(&self) -> [bool; 3] {
        self.0.mask
    }

    fn observe(&self, phi: &ScalarField) -> PyResult<ScalarField> {
        self.0.observe(&phi.0).map(ScalarField).map_err(err)
    }

    fn observe_vector_masked(&self, v: &VectorField) -> PyResult<VectorField> {
        self.0.observe_vector_masked(&v.0).map(VectorField).map_err(err)
    }

    fn approximation_ratio(&self, phi: &ScalarField) -> PyResult<f64> {
        self.0.approximation_ratio(&phi.0).map_err(err)
    }
}

#[pyclass(frozen)]
#[derive(Clone)]
struct ScalarField(adas_core::ScalarField);

#[pymethods]
impl ScalarField {
    #[staticmethod]
    fn from_numpy(grid: &Grid, samples: PyReadonlyArray3<'_, f64>) -> PyResult<Self> {
        let arr = samples.as_array().to_owned();
        adas_core::ScalarField::from_physical(grid.0, &arr)
            .map(Self)
            .map_err(err)
    }

    #[staticmethod]
    fn random(grid: &Grid, amplitude: f64, max_shell: usize, seed: u64) -> PyResult<Self> {
        adas_core::ScalarField::random(grid.0, amplitude, max_shell, seed)
            .map(Self)
            .map_err(err)
    }

    fn to_numpy<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyArray3<f64>>> {
        Ok(self.0.to_physical().map_err(err)?.into_pyarray_bound(py))
    }

    fn l2_norm(&self) -> f64 {
        self.0.l2_norm()
    }

    fn h1_seminorm(&self) -> f64 {
        self.0.h1_seminorm_sq().sqrt()
    }
}

#[pyclass(frozen)]
#[derive(Clone)]
struct VectorField(adas_core::VectorField);

#[pymethods]
impl VectorField {
    /// Build from a (3, n, n, n) array of physical samples.
    #[staticmethod]
    fn from_numpy(grid: &Grid, samples: PyReadonlyArray4<'_, f64>) -> PyResult<Self> {
        let arr = samples.as_array();
        if arr.shape()[0] != 3 {
            return Err(PyValueError::new_err(format!(
                "expected shape (3, n, n, n), got {:?}",
                arr.shape()
            )));
        }
        let comps = [
            arr.index_axis(ndarray::Axis(0), 0).to_owned(),
            arr.index_axis(ndarray::Axis(0), 1).to_owned(),
            arr.index_axis(ndarray::Axis(0), 2).to_owned(),
        ];
        adas_core::VectorField::from_physical(grid.0, [&comps[0], &comps[1], &comps[2]])
            .map(Self)
            .map_err(err)
    }

    /// Seeded divergence-free random field with exact L² energy.
    #[staticmethod]
    fn random_divergence_free(grid: &Grid, energy: f64, max_shell: usize, seed: u64) -> PyResult<Self> {
        adas_core::VectorField::random_divergence_free(grid.0, energy, max_shell, seed)
            .map(Self)
            .map_err(err)
    }

    fn to_numpy<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyArray4<f64>>> {
        let comps = self.0.to_physical().map_err(err)?;
        let n = self.0.grid().n();
        let mut out = ndarray::Array4::zeros((3, n, n, n));
        for (c, comp) in comps.iter().enumerate() {
            out.index_axis_mut(ndarray::Axis(0), c).assign(comp);
        }
        Ok(out.into_pyarray_bound(py))
    }

    fn component(&self, i: usize) -> PyResult<ScalarField> {
        if i >= 3 {
            return Err(PyValueError::new_err("component index out of range"));
        }
        Ok(ScalarField(self.0.component(i)))
    }

    fn l2_norm(&self) -> f64 {
        self.0.l2_norm()
    }

    fn energy(&self) -> f64 {
        self.0.l2_norm_sq()
    }

    fn divergence_residual(&self) -> f64 {
        self.0.divergence_residual()
    }

    fn sub(&self, other: &VectorField) -> PyResult<VectorField> {
        self.0.sub(&other.0).map(VectorField).map_err(err)
    }
}

#[pyfunction]
fn gradient(phi: &ScalarField) -> VectorField {
    VectorField(adas_core::ops::gradient(&phi.0))
}

#[pyfunction]
fn divergence(v: &VectorField) -> ScalarField {
    ScalarField(adas_core::ops::divergence(&v.0))
}

#[pyfunction]
fn laplacian(phi: &ScalarField) -> ScalarField {
    ScalarField(adas_core::ops::laplacian(&phi.0))
}

#[pyfunction]
fn leray_project(v: &VectorField) -> VectorField {
    VectorField(adas_core::ops::leray_project(&v.0))
}

#[pyfunction]
fn helmholtz_filter(v: &VectorField, alpha: f64) -> VectorField {
    VectorField(adas_core::ops::helmholtz_filter_vec(&v.0, alpha))
}

#[pyfunction]
fn dealias(v: &VectorField) -> VectorField {
    VectorField(adas_core::ops::dealias_vec(&v.0))
}

#[pyfunction]
fn estimate_gamma0(observer: &Observer, grid: &Grid, ensemble_size: usize, seed: u64) -> PyResult<f64> {
    adas_core::observation::estimate_gamma0(&observer.0, &grid.0, ensemble_size, seed).map_err(err)
}

#[pyfunction]
fn grashof(forcing: &VectorField, nu: f64) -> PyResult<f64> {
    adas_core::diagnostics::grashof(&forcing.0, nu).map_err(err)
}

/// Evaluate the synchronization conditions; returns a dict with the
/// thresholds and boolean verdicts.
#[pyfunction]
#[pyo3(signature = (nu, alpha, lambda1, g, mu, h, c0, c=1.0, ctilde=1.0))]
#[allow(clippy::too_many_arguments)]
fn check_conditions<'py>(
    py: Python<'py>,
    nu: f64,
    alpha: f64,
    lambda1: f64,
    g: f64,
    mu: f64,
    h: f64,
    c0: f64,
    c: f64,
    ctilde: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let rep = adas_core::assimilation::check_conditions(nu, alpha, lambda1, g, mu, h, c0, c, ctilde)
        .map_err(err)?;
    let out = PyDict::new_bound(py);
    out.set_item("mu_threshold", rep.mu_threshold)?;
    out.set_item("h_sq_max", rep.h_sq_max)?;
    out.set_item("cond1", rep.cond1)?;
    out.set_item("cond2", rep.cond2)?;
    Ok(out)
}

/// Run a twin experiment from the same TOML configuration text the CLI
/// accepts; returns the synchronization series and summary values.
#[pyfunction]
fn run_twin<'py>(py: Python<'py>, config_toml: &str) -> PyResult<Bound<'py, PyDict>> {
    let cfg = adas_core::config::RunConfig::from_str(config_toml).map_err(err)?;
    let twin = cfg.to_twin_config().map_err(err)?;
    let run = py.allow_threads(|| adas_core::assimilation::run_twin(&twin)).map_err(err)?;
    let out = PyDict::new_bound(py);
    let s = run.series;
    out.set_item("t", PyArray1::from_vec_bound(py, s.times))?;
    out.set_item("err_l2", PyArray1::from_vec_bound(py, s.err_l2))?;
    out.set_item("err_h1", PyArray1::from_vec_bound(py, s.err_h1))?;
    let [c1, c2, c3] = s.err_comp;
    out.set_item("err_c1", PyArray1::from_vec_bound(py, c1))?;
    out.set_item("err_c2", PyArray1::from_vec_bound(py, c2))?;
    out.set_item("err_c3", PyArray1::from_vec_bound(py, c3))?;
    out.set_item("energy_ref", PyArray1::from_vec_bound(py, s.energy_ref))?;
    out.set_item("energy_da", PyArray1::from_vec_bound(py, s.energy_da))?;
    out.set_item("cond1", s.cond1)?;
    out.set_item("cond2", s.cond2)?;
    out.set_item("grashof", run.grashof)?;
    out.set_item("measured_c0", run.measured_c0)?;
    out.set_item("floor", run.floor)?;
    out.set_item("final_reference", VectorField(run.final_ref.v).into_py(py))?;
    out.set_item("final_assimilated", VectorField(run.final_da.v).into_py(py))?;
    Ok(out)
}

/// Least-squares decay rate r with err² ≈ C·e^{−rt} over [t0, t1].
#[pyfunction]
fn estimate_decay_rate(
    t: Vec<f64>,
    err_l2: Vec<f64>,
    window: (f64, f64),
) -> PyResult<f64> {
    let series = adas_core::assimilation::SyncSeries {
        times: t,
        err_l2,
        ..Default::default()
    };
    adas_core::assimilation::estimate_decay_rate(&series, window).map_err(err)
}

#[pymodule]
fn adas_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Grid>()?;
    m.add_class::<Model>()?;
    m.add_class::<Observer>()?;
    m.add_class::<ScalarField>()?;
    m.add_class::<VectorField>()?;
    m.add_function(wrap_pyfunction!(gradient, m)?)?;
    m.add_function(wrap_pyfunction!(divergence, m)?)?;
    m.add_function(wrap_pyfunction!(laplacian, m)?)?;
    m.add_function(wrap_pyfunction!(leray_project, m)?)?;
    m.add_function(wrap_pyfunction!(helmholtz_filter, m)?)?;
    m.add_function(wrap_pyfunction!(dealias, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_gamma0, m)?)?;
    m.add_function(wrap_pyfunction!(grashof, m)?)?;
    m.add_function(wrap_pyfunction!(check_conditions, m)?)?;
    m.add_function(wrap_pyfunction!(run_twin, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_decay_rate, m)?)?;
    Ok(())
}
