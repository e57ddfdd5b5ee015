//! Python bindings for the `cqhj` core library.

use cqhj::integrate::{self, PathStatus};
use cqhj::singular::{self, Rect};
use cqhj::{IntegratorConfig, TrajectoryPath};
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn py_err(e: cqhj::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "GaussianPacket", module = "cqhj", frozen, from_py_object)]
#[derive(Clone, Copy)]
pub struct PyGaussianPacket {
    inner: cqhj::GaussianPacket,
}

#[pymethods]
impl PyGaussianPacket {
    #[new]
    #[pyo3(signature = (a, v0, sigma0, m = 1.0, hbar = 1.0))]
    fn new(a: f64, v0: f64, sigma0: f64, m: f64, hbar: f64) -> PyResult<Self> {
        let inner = cqhj::GaussianPacket::new(a, v0, sigma0, m, hbar).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn a(&self) -> f64 {
        self.inner.a
    }

    #[getter]
    fn v0(&self) -> f64 {
        self.inner.v0
    }

    #[getter]
    fn sigma0(&self) -> f64 {
        self.inner.sigma0
    }

    #[getter]
    fn m(&self) -> f64 {
        self.inner.m
    }

    #[getter]
    fn hbar(&self) -> f64 {
        self.inner.hbar
    }

    #[getter]
    fn p0(&self) -> f64 {
        self.inner.p0()
    }

    #[getter]
    fn energy(&self) -> f64 {
        self.inner.energy()
    }

    fn complex_spreading(&self, t: f64) -> Complex64 {
        self.inner.complex_spreading(t)
    }

    fn value(&self, z: Complex64, t: f64) -> PyResult<Complex64> {
        self.inner.value(z, t).map_err(py_err)
    }

    fn log_derivative(&self, z: Complex64, t: f64) -> Complex64 {
        self.inner.log_derivative(z, t)
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!("GaussianPacket(a={}, v0={}, sigma0={}, m={}, hbar={})", p.a, p.v0, p.sigma0, p.m, p.hbar)
    }
}

#[pyclass(name = "WaveModel", module = "cqhj", frozen)]
pub struct PyWaveModel {
    inner: cqhj::WaveModel,
}

#[pymethods]
impl PyWaveModel {
    #[new]
    fn new(packets: Vec<PyGaussianPacket>) -> PyResult<Self> {
        let inner = cqhj::WaveModel::new(packets.into_iter().map(|p| p.inner).collect()).map_err(py_err)?;
        Ok(Self { inner })
    }

    /// The symmetric two-packet collision (sigma0 = 1, a = -+8, v0 = +-2).
    #[staticmethod]
    fn head_on_collision() -> Self {
        Self { inner: cqhj::WaveModel::head_on_collision() }
    }

    #[getter]
    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    #[getter]
    fn packets(&self) -> Vec<PyGaussianPacket> {
        self.inner.packets().iter().map(|&inner| PyGaussianPacket { inner }).collect()
    }

    fn psi_bar(&self, z: Complex64, t: f64) -> PyResult<Complex64> {
        self.inner.psi_bar(z, t).map_err(py_err)
    }

    fn v_bar(&self, z: Complex64, t: f64) -> PyResult<Complex64> {
        self.inner.v_bar(z, t).map_err(py_err)
    }

    fn density(&self, x: f64, t: f64) -> PyResult<f64> {
        self.inner.density(x, t).map_err(py_err)
    }

    /// `(rho, S, v)` on the real axis.
    fn real_fields(&self, x: f64, t: f64) -> PyResult<(f64, f64, f64)> {
        let f = self.inner.real_fields(x, t).map_err(py_err)?;
        Ok((f.rho, f.s, f.v))
    }

    fn quantum_potential(&self, x: f64, t: f64) -> PyResult<f64> {
        self.inner.quantum_potential(x, t).map_err(py_err)
    }
}

#[pyclass(name = "Trajectory", module = "cqhj", frozen)]
pub struct PyTrajectory {
    inner: TrajectoryPath,
}

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times().collect()
    }

    #[getter]
    fn positions(&self) -> Vec<Complex64> {
        self.inner.samples.iter().map(|s| s.1).collect()
    }

    /// `completed`, `aborted_pole` or `aborted_nonfinite`.
    #[getter]
    fn status(&self) -> &'static str {
        self.inner.status.as_str()
    }

    fn __len__(&self) -> usize {
        self.inner.samples.len()
    }

    fn __repr__(&self) -> String {
        let (t, z) = self.inner.last();
        format!("Trajectory({} samples, status={}, end=({t}, {z}))", self.inner.samples.len(), self.inner.status)
    }
}

fn config(rel_tol: f64, dense_dt: f64) -> IntegratorConfig {
    IntegratorConfig { rel_tol, dense_dt, ..Default::default() }
}

#[pyfunction]
#[pyo3(signature = (model, z0, t0, t1, rel_tol = 1e-10, dense_dt = 0.02))]
fn propagate_complex(
    model: &PyWaveModel,
    z0: Complex64,
    t0: f64,
    t1: f64,
    rel_tol: f64,
    dense_dt: f64,
) -> PyResult<PyTrajectory> {
    let inner = integrate::propagate_complex(&model.inner, z0, t0, t1, &config(rel_tol, dense_dt)).map_err(py_err)?;
    Ok(PyTrajectory { inner })
}

#[pyfunction]
#[pyo3(signature = (model, x0, t0, t1, rel_tol = 1e-10, dense_dt = 0.02))]
fn propagate_real(
    model: &PyWaveModel,
    x0: f64,
    t0: f64,
    t1: f64,
    rel_tol: f64,
    dense_dt: f64,
) -> PyResult<PyTrajectory> {
    let inner = integrate::propagate_real(&model.inner, x0, t0, t1, &config(rel_tol, dense_dt)).map_err(py_err)?;
    Ok(PyTrajectory { inner })
}

/// Isochrone family crossing the real axis at `t_c`; one
/// `(x_cross, z0, residual, trajectory)` tuple per target, with `z0` and
/// `residual` set to `None` for aborted members.
#[pyfunction]
#[pyo3(signature = (model, t_c, x_targets, horizon, rel_tol = 1e-10))]
#[allow(clippy::type_complexity)]
fn build_isochrone(
    model: &PyWaveModel,
    t_c: f64,
    x_targets: Vec<f64>,
    horizon: f64,
    rel_tol: f64,
) -> PyResult<Vec<(f64, Option<Complex64>, Option<f64>, PyTrajectory)>> {
    let cfg = IntegratorConfig { rel_tol, ..Default::default() };
    let fam = cqhj::isochrone::build_isochrone(&model.inner, t_c, &x_targets, horizon, &cfg).map_err(py_err)?;
    Ok(fam
        .members
        .into_iter()
        .map(|m| (m.x_cross, m.z0, m.residual, PyTrajectory { inner: m.path }))
        .collect())
}

/// Nodes of `psi_bar` at time `t` in `(re_min, re_max, im_min, im_max)`, as
/// `(z, residual, winding)` tuples.
#[pyfunction]
#[pyo3(signature = (model, t, region, grid_n = 64))]
fn find_nodes(
    model: &PyWaveModel,
    t: f64,
    region: (f64, f64, f64, f64),
    grid_n: usize,
) -> PyResult<Vec<(Complex64, f64, i32)>> {
    let rect = Rect::new(region.0, region.1, region.2, region.3);
    let nodes = singular::find_nodes(&model.inner, t, rect, grid_n).map_err(py_err)?;
    Ok(nodes.into_iter().map(|n| (n.z_node, n.residual, n.winding)).collect())
}

#[pyfunction]
fn winding_number(model: &PyWaveModel, center: Complex64, radius: f64, t: f64) -> PyResult<i32> {
    singular::winding_number(&model.inner, center, radius, t, singular::WINDING_SAMPLES).map_err(py_err)
}

/// Circulation of `m v_bar` around a circle.
#[pyfunction]
#[pyo3(signature = (model, center, radius, t, n = 64))]
fn circulation(model: &PyWaveModel, center: Complex64, radius: f64, t: f64, n: usize) -> PyResult<f64> {
    singular::circulation(&singular::circle_contour(center, radius, n), &model.inner, t).map_err(py_err)
}

/// Whether a trajectory status string denotes a completed path.
#[pyfunction]
fn is_completed(status: &str) -> bool {
    status == PathStatus::Completed.as_str()
}

#[pymodule]
#[pyo3(name = "cqhj")]
fn cqhj_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGaussianPacket>()?;
    m.add_class::<PyWaveModel>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(propagate_complex, m)?)?;
    m.add_function(wrap_pyfunction!(propagate_real, m)?)?;
    m.add_function(wrap_pyfunction!(build_isochrone, m)?)?;
    m.add_function(wrap_pyfunction!(find_nodes, m)?)?;
    m.add_function(wrap_pyfunction!(winding_number, m)?)?;
    m.add_function(wrap_pyfunction!(circulation, m)?)?;
    m.add_function(wrap_pyfunction!(is_completed, m)?)?;
    Ok(())
}
