//! Invariant suite run by the `selftest` command: identities that every layer
//! must satisfy, each checked on a handful of representative inputs.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::cylwave::{eval_m, eval_n, CylPoint, CylVector, ModeParams, Parity, RadialKind, WaveKind};
use crate::dispersion::{fundamental_root, mode_roots, DEFAULT_SEARCH_MAX};
use crate::dynamics::{
    collective_channels, collective_populations, gate_initial_state, gate_simulate, lindblad_evolve, lindblad_evolve_correlated,
    pair_channels, pair_lowering, pair_populations, CMatrix, DensityMatrix, GateParams, GateRates, Jump, RateMatrix2, StepControl,
};
use crate::emitters::{gamma_cross, gamma_total, Emitter};
use crate::greentensor::{green_reflected, QuadratureSpec};
use crate::scatter::{boundary_residual, mode_determinant, solve_coeffs, WireSystem};
use crate::specfun::{bessel_j, bessel_j_pair, hankel1, hankel1_pair};
use crate::{Result, K0_REF};

/// Outcome of one invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub module: &'static str,
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed deviation against its tolerance, or the error raised.
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfTestReport {
    pub checks: Vec<Check>,
}

impl SelfTestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn bounded(module: &'static str, name: &'static str, worst: Result<f64>, tol: f64) -> Check {
    match worst {
        Ok(w) => Check { module, name, passed: w <= tol, detail: format!("worst {w:.3e} (tolerance {tol:.1e})") },
        Err(e) => Check { module, name, passed: false, detail: e.to_string() },
    }
}

fn wronskian() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for n in [0, 1, 5, 20] {
        for z in [c(0.3, 0.0), c(2.5, 0.7), c(11.0, -0.2), c(0.4, 6.0), c(40.0, 1.0)] {
            let j = bessel_j_pair(n, z)?;
            let h = hankel1_pair(n, z)?;
            let w = j.value * h.deriv - j.deriv * h.value;
            let exact = c(0.0, 2.0 / std::f64::consts::PI) / z;
            worst = worst.max((w - exact).norm() / exact.norm());
        }
    }
    Ok(worst)
}

fn recurrence() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for n in [1, 4, 15] {
        for z in [c(0.9, 0.1), c(7.0, 2.0), c(25.0, 0.0)] {
            let two_n_over_z = z.inv() * (2.0 * n as f64);
            for f in [bessel_j, hankel1] {
                let (a, b, m) = (f(n - 1, z)?, f(n + 1, z)?, f(n, z)?);
                let scale = a.norm() + b.norm() + (two_n_over_z * m).norm();
                worst = worst.max((a + b - two_n_over_z * m).norm() / scale);
            }
        }
    }
    Ok(worst)
}

/// Central-difference curl in cylindrical coordinates.
fn numerical_curl(f: &dyn Fn(CylPoint) -> Result<CylVector>, p: CylPoint, h: f64) -> Result<CylVector> {
    let d = |dr: f64, dphi: f64, dz: f64| -> Result<(CylVector, CylVector)> {
        Ok((
            f(CylPoint::new(p.r + dr, p.phi + dphi, p.z + dz))?,
            f(CylPoint::new(p.r - dr, p.phi - dphi, p.z - dz))?,
        ))
    };
    let (rp, rm) = d(h, 0.0, 0.0)?;
    let (pp, pm) = d(0.0, h, 0.0)?;
    let (zp, zm) = d(0.0, 0.0, h)?;
    let inv = 1.0 / (2.0 * h);
    let dfz_dphi = (pp.z - pm.z) * inv;
    let dfphi_dz = (zp.phi - zm.phi) * inv;
    let dfr_dz = (zp.r - zm.r) * inv;
    let dfz_dr = (rp.z - rm.z) * inv;
    let drfphi_dr = (rp.phi * (p.r + h) - rm.phi * (p.r - h)) * inv;
    let dfr_dphi = (pp.r - pm.r) * inv;
    Ok(CylVector::new(dfz_dphi / p.r - dfphi_dz, dfr_dz - dfz_dr, (drfphi_dr - dfr_dphi) / p.r))
}

fn curl_duality() -> Result<f64> {
    let mut worst: f64 = 0.0;
    let p = CylPoint::new(0.37, 0.6, 0.15);
    for (n, kz, k) in [(0, c(3.0, 0.0), c(K0_REF, 0.0)), (2, c(9.0, 0.0), c(K0_REF, 0.0)), (1, c(4.0, 0.2), c(2.0, 8.0))] {
        let mp = ModeParams::new(n, kz, k);
        for radial in [RadialKind::Regular, RadialKind::Outgoing] {
            for parity in [Parity::Even, Parity::Odd] {
                let kind = WaveKind::new(radial, parity);
                let m = |q: CylPoint| eval_m(kind, &mp, q);
                let nf = |q: CylPoint| eval_n(kind, &mp, q);
                for (field, dual) in [(&m as &dyn Fn(CylPoint) -> Result<CylVector>, &nf as &dyn Fn(CylPoint) -> Result<CylVector>), (&nf, &m)] {
                    let curl = numerical_curl(field, p, 1e-5)?;
                    let expect = dual(p)?.scale(mp.k);
                    worst = worst.max((curl - expect).norm() / expect.norm());
                }
            }
        }
    }
    Ok(worst)
}

fn boundary_and_determinant() -> Result<(f64, f64)> {
    let lossy = WireSystem::new(0.05, c(-75.0, 0.6))?;
    let mut residual: f64 = 0.0;
    for n in [0, 1, 3] {
        for kz in [0.3 * K0_REF, 1.2 * K0_REF, 4.0 * K0_REF] {
            let coeffs = solve_coeffs(&lossy, n, c(kz, 0.0), K0_REF)?;
            residual = residual.max(boundary_residual(&lossy, n, c(kz, 0.0), K0_REF, &coeffs)?);
        }
    }
    // the determinant vanishes at every root found from the mode equation
    let lossless = WireSystem::new(0.25, c(-75.0, 0.0))?;
    let mut det_ratio: f64 = 0.0;
    for n in [0, 1] {
        for root in mode_roots(&lossless, n, K0_REF, DEFAULT_SEARCH_MAX)? {
            let at = mode_determinant(&lossless, n, c(root.kz, 0.0), K0_REF)?.norm();
            let off = mode_determinant(&lossless, n, c(root.kz + 1e-3 * (root.kz - K0_REF), 0.0), K0_REF)?.norm();
            det_ratio = det_ratio.max(at / off);
        }
    }
    Ok((residual, det_ratio))
}

fn green_checks() -> Result<(f64, f64, f64)> {
    let sys = WireSystem::new(0.01, c(-75.0, 0.6))?;
    let q = QuadratureSpec::default().with_rel_tol(1e-7);
    let a = CylPoint::new(0.02, 0.3, 0.0);
    let b = CylPoint::new(0.03, 1.1, 0.07);
    let gab = green_reflected(&sys, a, b, K0_REF, &q)?;
    let gba = green_reflected(&sys, b, a, K0_REF, &q)?;
    let scale = gab.matrix.iter().fold(0.0_f64, |m, z| m.max(z.im.abs()));
    let recip = (gab.matrix - gba.matrix.transpose()).iter().fold(0.0_f64, |m, z| m.max(z.im.abs())) / scale;
    // passivity: the anti-Hermitian part of the total tensor at coincidence is nonnegative
    let gaa = green_reflected(&sys, a, a, K0_REF, &q)?;
    let unit = K0_REF / (6.0 * std::f64::consts::PI);
    let total = gaa.matrix + nalgebra::Matrix3::from_diagonal_element(c(0.0, unit));
    let anti = (total - total.adjoint()) * c(0.0, -0.5);
    let lmin = nalgebra::SymmetricEigen::new(anti).eigenvalues.iter().fold(f64::INFINITY, |m, &x| m.min(x));
    // a vacuum wire scatters nothing
    let vac = WireSystem::new(0.01, c(1.0, 1e-9))?;
    let gv = green_reflected(&vac, a, a, K0_REF, &QuadratureSpec { peak_refinement: false, ..Default::default() })?;
    let vacuum = gv.matrix.iter().fold(0.0_f64, |m, z| m.max(z.norm())) / unit;
    Ok((recip, (-lmin).max(0.0) / unit, vacuum))
}

fn rate_checks() -> Result<(f64, f64)> {
    let sys = WireSystem::new(0.01, c(-75.0, 0.6))?;
    let q = QuadratureSpec::default().with_rel_tol(1e-5);
    let e = Emitter::radial(0.015, 0.0, 0.0)?;
    let g11 = gamma_total(&sys, &e, &q)?;
    let mut excess = f64::NEG_INFINITY;
    for d in [0.05, 0.25, 0.5, 1.3] {
        let g12 = gamma_cross(&sys, &e, &e.shifted(d), &q)?;
        excess = excess.max(g12.value.abs() - g11.value);
    }
    // rotation about and translation along the axis
    let fine = QuadratureSpec::default().with_rel_tol(1e-8);
    let base = gamma_total(&sys, &e, &fine)?;
    let moved = Emitter::radial(0.015, 2.1, -0.8)?;
    let g = gamma_total(&sys, &moved, &fine)?;
    Ok((excess, (g.value - base.value).abs() / base.value))
}

fn pair_closed_form() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (g11, g12) in [(1.0, 0.3), (0.7, -0.69), (2.0, 2.0)] {
        let rm = RateMatrix2::new(g11, g12)?;
        let rho0 = DensityMatrix::diagonal(&[0.1, 0.1, 0.1, 0.7])?;
        let ev = lindblad_evolve(&CMatrix::zeros(4, 4), &pair_channels(&rm), &rho0, 1.7, StepControl::default())?;
        let a = collective_populations(&ev.rho)?;
        let b = pair_populations(&rm, &rho0, 1.7)?;
        for (x, y) in [(a.ee, b.ee), (a.s, b.s), (a.as_, b.as_), (a.gg, b.gg)] {
            worst = worst.max((x - y).abs());
        }
    }
    Ok(worst)
}

fn lindblad_preservation() -> Result<(f64, f64)> {
    let rates = GateRates::new(0.05, 1.95)?;
    let out = gate_simulate(&GateParams::symmetric(0.3, rates), &gate_initial_state())?;
    let herm = out.rho.hermiticity_error();
    Ok((out.trace_drift.max(herm), (-out.rho.min_eigenvalue()).max(0.0)))
}

fn channel_equivalence() -> Result<f64> {
    let ops = pair_lowering();
    let gamma = DMatrix::from_row_slice(2, 2, &[1.0, 0.6, 0.6, 1.0]);
    let mut h = CMatrix::zeros(4, 4);
    h[(1, 3)] = c(0.4, 0.0);
    h[(3, 1)] = c(0.4, 0.0);
    h[(0, 2)] = c(0.25, 0.0);
    h[(2, 0)] = c(0.25, 0.0);
    let psi = DVector::from_vec(vec![c(0.5, 0.0), c(0.5, 0.1), c(0.0, 0.5), c(0.4, 0.0)]);
    let rho0 = DensityMatrix::pure(&psi)?;
    let ctl = StepControl { tol: 1e-11, ..Default::default() };
    let a = lindblad_evolve_correlated(&h, &ops, &gamma, &rho0, 2.0, ctl)?;
    let jumps: Vec<Jump> = collective_channels(&ops, &gamma)?;
    let b = lindblad_evolve(&h, &jumps, &rho0, 2.0, ctl)?;
    Ok((&a.rho.0 - &b.rho.0).iter().fold(0.0_f64, |m, z| m.max(z.norm())))
}

fn fundamental_monotone() -> Result<f64> {
    let mut last = 0.0;
    let mut violations = 0.0;
    for r in [0.5, 0.2, 0.05, 0.02, 0.01, 0.005] {
        let k = fundamental_root(&WireSystem::new(r, c(-75.0, 0.0))?, K0_REF)?.kz;
        if k <= last {
            violations += 1.0;
        }
        last = k;
    }
    Ok(violations)
}

/// Run every invariant.
pub fn run_selftest() -> SelfTestReport {
    let mut checks = vec![
        bounded("specfun", "wronskian J H' - J' H = 2i/(pi z)", wronskian(), 1e-12),
        bounded("specfun", "three-term recurrence", recurrence(), 1e-12),
        bounded("cylwave", "curl M = k N and curl N = k M", curl_duality(), 1e-6),
    ];
    match boundary_and_determinant() {
        Ok((res, det)) => {
            checks.push(bounded("scatter", "boundary residual of the solved coefficients", Ok(res), 1e-10));
            checks.push(bounded("scatter", "determinant vanishes at mode-equation roots", Ok(det), 1e-6));
        }
        Err(e) => checks.push(bounded("scatter", "boundary system", Err(e), 0.0)),
    }
    checks.push(bounded("dispersion", "fundamental root grows as R shrinks (violations)", fundamental_monotone(), 0.0));
    match green_checks() {
        Ok((recip, passive, vacuum)) => {
            checks.push(bounded("greentensor", "reciprocity G(a,b) = G(b,a)^T", Ok(recip), 1e-5));
            checks.push(bounded("greentensor", "passivity of Im G at coincidence (units of Gamma0)", Ok(passive), 1e-6));
            checks.push(bounded("greentensor", "vacuum wire reflects nothing (units of Gamma0)", Ok(vacuum), 1e-6));
        }
        Err(e) => checks.push(bounded("greentensor", "reflected tensor", Err(e), 0.0)),
    }
    match rate_checks() {
        Ok((excess, sym)) => {
            checks.push(bounded("emitters", "|Gamma12| - Gamma11 (rate matrix positivity)", Ok(excess), 1e-6));
            checks.push(bounded("emitters", "rotation and translation invariance", Ok(sym), 1e-8));
        }
        Err(e) => checks.push(bounded("emitters", "rates", Err(e), 0.0)),
    }
    checks.push(bounded("dynamics", "closed-form pair populations vs master equation", pair_closed_form(), 1e-7));
    match lindblad_preservation() {
        Ok((trace, neg)) => {
            checks.push(bounded("dynamics", "trace and hermiticity preserved", Ok(trace), 1e-9));
            checks.push(bounded("dynamics", "positivity preserved", Ok(neg), 1e-8));
        }
        Err(e) => checks.push(bounded("dynamics", "gate evolution", Err(e), 0.0)),
    }
    checks.push(bounded("dynamics", "correlated decay equals collective channels", channel_equivalence(), 1e-8));
    SelfTestReport { checks }
}
