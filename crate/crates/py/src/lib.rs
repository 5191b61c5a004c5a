//! Python bindings: wire, emitters, rates, cross rates and the phase gate.
//!
//! Lengths in units of λ₀, wavenumbers returned as k_z/k₀, rates in Γ₀.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use plasmonwire::cylwave::CylPoint;
use plasmonwire::dispersion::{fundamental_root, mode_roots, resonance_hwhm, resonance_profile_auto, DEFAULT_SEARCH_MAX};
use plasmonwire::dynamics::{gate_optimize, gate_scaling, nanowire_gate_fidelity, GateRates};
use plasmonwire::emitters::{self, DistanceObjective};
use plasmonwire::greentensor::QuadratureSpec;
use plasmonwire::scatter::WireSystem;
use plasmonwire::{Complex64, Error, K0_REF};

create_exception!(plasmonwire_py, ConvergenceError, PyRuntimeError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Domain(_) | Error::Range(_) | Error::Precondition(_) => PyValueError::new_err(e.to_string()),
        Error::NearPole { .. } | Error::Convergence(_) | Error::Resolution(_) => ConvergenceError::new_err(e.to_string()),
    }
}

/// Metallic wire of radius `radius` and permittivity `eps_re + i eps_im`.
#[pyclass(frozen, skip_from_py_object, name = "Wire")]
#[derive(Clone)]
struct PyWire(WireSystem);

#[pymethods]
impl PyWire {
    #[new]
    #[pyo3(signature = (radius, eps_re=-75.0, eps_im=0.6))]
    fn new(radius: f64, eps_re: f64, eps_im: f64) -> PyResult<Self> {
        WireSystem::new(radius, Complex64::new(eps_re, eps_im)).map(Self).map_err(to_py)
    }

    #[getter]
    fn radius(&self) -> f64 {
        self.0.radius
    }

    #[getter]
    fn eps(&self) -> (f64, f64) {
        (self.0.eps.re, self.0.eps.im)
    }

    /// k_z/k₀ of every guided root of order `n` of the lossless wire.
    fn mode_roots(&self, n: u32) -> PyResult<Vec<f64>> {
        let roots = mode_roots(&self.0.lossless(), n, K0_REF, DEFAULT_SEARCH_MAX).map_err(to_py)?;
        Ok(roots.iter().map(|r| r.kz / K0_REF).collect())
    }

    /// k_z/k₀ of the n = 0 plasmon.
    fn plasmon_kz(&self) -> PyResult<f64> {
        Ok(fundamental_root(&self.0, K0_REF).map_err(to_py)?.kz / K0_REF)
    }

    /// (k_peak/k₀, hwhm/k₀) of the n = 0 resonance probed at r_A = R + gap.
    #[pyo3(signature = (gap=0.005))]
    fn resonance(&self, gap: f64) -> PyResult<(f64, f64)> {
        let profile = resonance_profile_auto(&self.0, self.0.radius + gap, K0_REF).map_err(to_py)?;
        let fit = resonance_hwhm(&profile).map_err(to_py)?;
        Ok((fit.k_peak / K0_REF, fit.hwhm / K0_REF))
    }

    fn __repr__(&self) -> String {
        format!("Wire(radius={}, eps_re={}, eps_im={})", self.0.radius, self.0.eps.re, self.0.eps.im)
    }
}

/// Point dipole at cylindrical position (r, phi, z); `dipole` in the local (r, phi, z) frame.
#[pyclass(frozen, skip_from_py_object, name = "Emitter")]
#[derive(Clone)]
struct PyEmitter(emitters::Emitter);

#[pymethods]
impl PyEmitter {
    #[new]
    #[pyo3(signature = (r, phi=0.0, z=0.0, dipole=(1.0, 0.0, 0.0)))]
    fn new(r: f64, phi: f64, z: f64, dipole: (f64, f64, f64)) -> PyResult<Self> {
        emitters::Emitter::new(CylPoint::new(r, phi, z), [dipole.0, dipole.1, dipole.2]).map(Self).map_err(to_py)
    }

    #[getter]
    fn position(&self) -> (f64, f64, f64) {
        let p = self.0.position;
        (p.r, p.phi, p.z)
    }

    #[getter]
    fn dipole(&self) -> (f64, f64, f64) {
        let [a, b, c] = self.0.dipole;
        (a, b, c)
    }

    /// Copy moved along the axis by `dz`.
    fn shifted(&self, dz: f64) -> Self {
        Self(self.0.shifted(dz))
    }

    fn __repr__(&self) -> String {
        let (r, phi, z) = self.position();
        format!("Emitter(r={r}, phi={phi}, z={z}, dipole={:?})", self.0.dipole)
    }
}

/// Quadrature controls.
#[pyclass(frozen, skip_from_py_object, name = "Quadrature")]
#[derive(Clone)]
struct PyQuadrature(QuadratureSpec);

#[pymethods]
impl PyQuadrature {
    #[new]
    #[pyo3(signature = (rel_tol=1e-6, abs_tol=0.0, n_max=60))]
    fn new(rel_tol: f64, abs_tol: f64, n_max: u32) -> PyResult<Self> {
        let q = QuadratureSpec { rel_tol, abs_tol, n_max, ..Default::default() };
        q.validate(K0_REF).map_err(to_py)?;
        Ok(Self(q))
    }

    #[getter]
    fn rel_tol(&self) -> f64 {
        self.0.rel_tol
    }
}

fn spec(q: Option<PyRef<'_, PyQuadrature>>) -> QuadratureSpec {
    q.map(|q| q.0).unwrap_or_default()
}

/// (Γ_tot/Γ₀, error estimate).
#[pyfunction]
#[pyo3(signature = (wire, emitter, quadrature=None))]
fn gamma_total(py: Python<'_>, wire: PyRef<'_, PyWire>, emitter: PyRef<'_, PyEmitter>, quadrature: Option<PyRef<'_, PyQuadrature>>) -> PyResult<(f64, f64)> {
    let (w, e, q) = (wire.0, emitter.0, spec(quadrature));
    let r = py.detach(|| emitters::gamma_total(&w, &e, &q)).map_err(to_py)?;
    Ok((r.value, r.error))
}

/// Γ_pl/Γ₀ of the n = 0 plasmon channel.
#[pyfunction]
#[pyo3(signature = (wire, emitter, quadrature=None))]
fn gamma_plasmon(py: Python<'_>, wire: PyRef<'_, PyWire>, emitter: PyRef<'_, PyEmitter>, quadrature: Option<PyRef<'_, PyQuadrature>>) -> PyResult<f64> {
    let (w, e, q) = (wire.0, emitter.0, spec(quadrature));
    Ok(py.detach(|| emitters::gamma_plasmon(&w, &e, &q)).map_err(to_py)?.rate.value)
}

/// Γ₁₂/Γ₀ between two emitters.
#[pyfunction]
#[pyo3(signature = (wire, first, second, quadrature=None))]
fn gamma_cross(
    py: Python<'_>,
    wire: PyRef<'_, PyWire>,
    first: PyRef<'_, PyEmitter>,
    second: PyRef<'_, PyEmitter>,
    quadrature: Option<PyRef<'_, PyQuadrature>>,
) -> PyResult<f64> {
    let (w, a, b, q) = (wire.0, first.0, second.0, spec(quadrature));
    Ok(py.detach(|| emitters::gamma_cross(&w, &a, &b, &q)).map_err(to_py)?.value)
}

/// [(d, Γ₁₂/Γ₁₁)] for the emitter and its copies displaced along the axis.
#[pyfunction]
#[pyo3(signature = (wire, emitter, separations, quadrature=None))]
fn cross_sweep(
    py: Python<'_>,
    wire: PyRef<'_, PyWire>,
    emitter: PyRef<'_, PyEmitter>,
    separations: Vec<f64>,
    quadrature: Option<PyRef<'_, PyQuadrature>>,
) -> PyResult<Vec<(f64, f64)>> {
    let (w, e, q) = (wire.0, emitter.0, spec(quadrature));
    let pts = py.detach(|| emitters::cross_sweep(&w, &e, &separations, &q)).map_err(to_py)?;
    Ok(pts.iter().map(|p| (p.d, p.ratio)).collect())
}

/// Γ_pl/Γ_tot for a radial emitter at `r_a`.
#[pyfunction]
#[pyo3(signature = (wire, r_a, quadrature=None))]
fn plasmon_fraction(py: Python<'_>, wire: PyRef<'_, PyWire>, r_a: f64, quadrature: Option<PyRef<'_, PyQuadrature>>) -> PyResult<f64> {
    let (w, q) = (wire.0, spec(quadrature));
    py.detach(|| emitters::plasmon_fraction(&w, r_a, &q)).map_err(to_py)
}

/// (r_A, Γ_pl/Γ_tot, at_boundary) maximizing the plasmon fraction over `bounds`.
#[pyfunction]
#[pyo3(signature = (wire, bounds, scan_points=9, quadrature=None))]
fn optimal_distance(
    py: Python<'_>,
    wire: PyRef<'_, PyWire>,
    bounds: (f64, f64),
    scan_points: usize,
    quadrature: Option<PyRef<'_, PyQuadrature>>,
) -> PyResult<(f64, f64, bool)> {
    let (w, q) = (wire.0, spec(quadrature));
    let o = py
        .detach(|| emitters::optimize_emitter_distance(&w, DistanceObjective::PlasmonFraction, bounds, scan_points, &q))
        .map_err(to_py)?;
    Ok((o.r_a, o.value, o.at_boundary))
}

/// (Ω_opt, F_opt) of the phase gate with collective rates Γ_S < Γ_AS.
#[pyfunction]
fn gate_fidelity(py: Python<'_>, gamma_s: f64, gamma_as: f64) -> PyResult<(f64, f64)> {
    let rates = GateRates::new(gamma_s, gamma_as).map_err(to_py)?;
    let o = py.detach(|| gate_optimize(rates)).map_err(to_py)?;
    Ok((o.omega_opt, o.f_opt))
}

/// [(Γ_S/Γ_eg, Ω_opt, 1 − F)] for Γ_eg = 1.
#[pyfunction]
fn gate_infidelity_scaling(py: Python<'_>, ratios: Vec<f64>) -> PyResult<Vec<(f64, f64, f64)>> {
    let pts = py.detach(|| gate_scaling(&ratios)).map_err(to_py)?;
    Ok(pts.iter().map(|p| (p.ratio, p.omega_opt, p.infidelity)).collect())
}

/// (Γ₁₁, Γ₁₂, F_opt) for radial emitters at `r_a`, `d` apart along the wire.
#[pyfunction]
#[pyo3(signature = (wire, r_a, d, quadrature=None))]
fn nanowire_gate(py: Python<'_>, wire: PyRef<'_, PyWire>, r_a: f64, d: f64, quadrature: Option<PyRef<'_, PyQuadrature>>) -> PyResult<(f64, f64, f64)> {
    let (w, q) = (wire.0, spec(quadrature));
    let g = py.detach(|| nanowire_gate_fidelity(&w, r_a, d, &q)).map_err(to_py)?;
    Ok((g.rates.gamma11, g.rates.gamma12, g.optimum.f_opt))
}

/// [(module, check, passed, detail)] from the invariant suite.
#[pyfunction]
fn selftest(py: Python<'_>) -> Vec<(String, String, bool, String)> {
    let report = py.detach(plasmonwire::selftest::run_selftest);
    report.checks.into_iter().map(|c| (c.module.to_string(), c.name.to_string(), c.passed, c.detail)).collect()
}

#[pymodule]
fn plasmonwire_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWire>()?;
    m.add_class::<PyEmitter>()?;
    m.add_class::<PyQuadrature>()?;
    m.add("ConvergenceError", m.py().get_type::<ConvergenceError>())?;
    m.add_function(wrap_pyfunction!(gamma_total, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_plasmon, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_cross, m)?)?;
    m.add_function(wrap_pyfunction!(cross_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(plasmon_fraction, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_distance, m)?)?;
    m.add_function(wrap_pyfunction!(gate_fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(gate_infidelity_scaling, m)?)?;
    m.add_function(wrap_pyfunction!(nanowire_gate, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    m.add("K0", K0_REF)?;
    Ok(())
}
