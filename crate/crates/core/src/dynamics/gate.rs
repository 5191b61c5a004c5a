//! Phase gate between two lambda atoms whose |g⟩–|e⟩ transitions share the
//! plasmon channel.
//!
//! Per-atom basis {g = 0, s = 1, e = 2}, pair index 3a + b. The drive is
//! Σ_j (Ω_j/2)(|e⟩⟨g|_j + h.c.) and the decay runs through the collective
//! channels σ_S = (σ₁+σ₂)/√2 (rate Γ_S) and σ_AS = (σ₁−σ₂)/√2 (rate Γ_AS),
//! σ_j = |g⟩⟨e|_j. The level |s⟩ neither couples to the drive nor receives
//! decay.
//!
//! The pulse lasts T = 2π/Ω_S with Ω_S = (Ω₁+Ω₂)/√2, a full Rabi cycle on
//! |gg⟩–|S⟩. Starting from ((|s⟩+|g⟩)/√2)^⊗2 the ideal gate gives
//! (|ss⟩+|sg⟩+|gs⟩−|gg⟩)/2.

use nalgebra::DVector;
use num_complex::Complex64;

use super::lindblad::{lindblad_evolve, CMatrix, DensityMatrix, Jump, StepControl};
use super::pair::RateMatrix2;
use crate::emitters::{gamma_cross, gamma_total, Emitter};
use crate::greentensor::QuadratureSpec;
use crate::optimize::{golden_max, log_grid};
use crate::scatter::WireSystem;
use crate::{Error, Result};

const G: usize = 0;
const S: usize = 1;
const E: usize = 2;

fn idx(a: usize, b: usize) -> usize {
    3 * a + b
}

fn c(x: f64) -> Complex64 {
    Complex64::from(x)
}

/// Collective decay rates of the gate transition (units Γ₀ or any common unit).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateRates {
    pub gamma_s: f64,
    pub gamma_as: f64,
}

impl GateRates {
    pub fn new(gamma_s: f64, gamma_as: f64) -> Result<Self> {
        if !(gamma_s >= 0.0 && gamma_as >= 0.0 && gamma_s.is_finite() && gamma_as.is_finite()) {
            return Err(Error::Precondition(format!("gate rates Γ_S = {gamma_s}, Γ_AS = {gamma_as} must be nonnegative")));
        }
        Ok(Self { gamma_s, gamma_as })
    }

    pub fn from_rate_matrix(rm: &RateMatrix2) -> Self {
        Self { gamma_s: rm.gamma_s().max(0.0), gamma_as: rm.gamma_as().max(0.0) }
    }

    /// Single-atom rate Γ_eg = (Γ_S + Γ_AS)/2.
    pub fn gamma_eg(&self) -> f64 {
        0.5 * (self.gamma_s + self.gamma_as)
    }
}

/// Drive and rates of one gate run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateParams {
    pub omega1: f64,
    pub omega2: f64,
    /// Rabi angle on |gg⟩–|S⟩; 2π for the gate.
    pub pulse_area: f64,
    pub rates: GateRates,
}

impl GateParams {
    /// Equal drives Ω₁ = Ω₂ = `omega` with a 2π pulse.
    pub fn symmetric(omega: f64, rates: GateRates) -> Self {
        Self { omega1: omega, omega2: omega, pulse_area: 2.0 * std::f64::consts::PI, rates }
    }

    pub fn omega_s(&self) -> f64 {
        (self.omega1 + self.omega2) * std::f64::consts::FRAC_1_SQRT_2
    }

    pub fn omega_as(&self) -> f64 {
        (self.omega1 - self.omega2) * std::f64::consts::FRAC_1_SQRT_2
    }

    pub fn duration(&self) -> f64 {
        self.pulse_area / self.omega_s()
    }
}

/// ((|s⟩+|g⟩)/√2)^⊗2
pub fn gate_initial_state() -> DensityMatrix {
    let mut psi = DVector::zeros(9);
    for a in [G, S] {
        for b in [G, S] {
            psi[idx(a, b)] = c(0.5);
        }
    }
    DensityMatrix::pure(&psi).expect("normalized")
}

/// (|ss⟩+|sg⟩+|gs⟩−|gg⟩)/2
pub fn gate_ideal_state() -> DVector<Complex64> {
    let mut psi = DVector::zeros(9);
    for a in [G, S] {
        for b in [G, S] {
            psi[idx(a, b)] = c(0.5);
        }
    }
    psi[idx(G, G)] = c(-0.5);
    psi
}

fn single(op: &[[f64; 3]; 3], atom: usize) -> CMatrix {
    CMatrix::from_fn(9, 9, |i, j| {
        let (a, b) = (i / 3, i % 3);
        let (a2, b2) = (j / 3, j % 3);
        if atom == 0 {
            if b == b2 { c(op[a][a2]) } else { c(0.0) }
        } else if a == a2 {
            c(op[b][b2])
        } else {
            c(0.0)
        }
    })
}

fn lowering() -> [[f64; 3]; 3] {
    let mut m = [[0.0; 3]; 3];
    m[G][E] = 1.0;
    m
}

fn drive() -> [[f64; 3]; 3] {
    let mut m = [[0.0; 3]; 3];
    m[G][E] = 0.5;
    m[E][G] = 0.5;
    m
}

/// Result of a gate run.
#[derive(Debug, Clone, PartialEq)]
pub struct GateOutcome {
    pub rho: DensityMatrix,
    pub fidelity: f64,
    pub trace_drift: f64,
}

/// Run one gate pulse from `rho0` and score it against the ideal output.
pub fn gate_simulate(gp: &GateParams, rho0: &DensityMatrix) -> Result<GateOutcome> {
    if !(gp.omega1 >= 0.0 && gp.omega2 >= 0.0 && gp.omega_s() > 0.0) {
        return Err(Error::Precondition(format!(
            "drives Ω1 = {}, Ω2 = {} must be nonnegative with Ω1 + Ω2 > 0",
            gp.omega1, gp.omega2
        )));
    }
    if rho0.dim() != 9 {
        return Err(Error::Precondition(format!("gate state must be 9×9, got {}", rho0.dim())));
    }
    let h = single(&drive(), 0) * c(gp.omega1) + single(&drive(), 1) * c(gp.omega2);
    let (s1, s2) = (single(&lowering(), 0), single(&lowering(), 1));
    let r = c(std::f64::consts::FRAC_1_SQRT_2);
    let jumps = [
        Jump { op: (&s1 + &s2) * r, rate: gp.rates.gamma_s },
        Jump { op: (&s1 - &s2) * r, rate: gp.rates.gamma_as },
    ];
    let ev = lindblad_evolve(&h, &jumps, rho0, gp.duration(), StepControl::default())?;
    let fidelity = ev.rho.expectation(&gate_ideal_state());
    Ok(GateOutcome { rho: ev.rho, fidelity, trace_drift: ev.trace_drift })
}

/// Best gate over the symmetric drive strength.
#[derive(Debug, Clone, PartialEq)]
pub struct GateOptimum {
    /// Optimal Ω₁ = Ω₂.
    pub omega_opt: f64,
    pub f_opt: f64,
    /// The optimum sits on an end of [Γ_S, Γ_AS].
    pub at_boundary: bool,
    /// The coarse scan was not unimodal and the dense fallback scan was used.
    pub fallback: bool,
}

/// Maximize the fidelity over Ω₁ = Ω₂ ∈ [Γ_S, Γ_AS] in log scale: a 9-point
/// scan, golden-section refinement to 1e-3 relative, and a 30-point scan
/// when the coarse scan has more than one turning point.
pub fn gate_optimize(rates: GateRates) -> Result<GateOptimum> {
    if !(rates.gamma_as > rates.gamma_s && rates.gamma_s > 0.0) {
        return Err(Error::Precondition(format!(
            "gate needs Γ_AS > Γ_S > 0 (got Γ_S = {}, Γ_AS = {})",
            rates.gamma_s, rates.gamma_as
        )));
    }
    let rho0 = gate_initial_state();
    let fid = |x: f64| -> Result<f64> { Ok(gate_simulate(&GateParams::symmetric(x.exp(), rates), &rho0)?.fidelity) };
    let scan = |n: usize| -> Result<(Vec<f64>, Vec<f64>)> {
        let xs: Vec<f64> = log_grid(rates.gamma_s, rates.gamma_as, n).iter().map(|x| x.ln()).collect();
        let ys = xs.iter().map(|&x| fid(x)).collect::<Result<Vec<f64>>>()?;
        Ok((xs, ys))
    };
    let (mut xs, mut ys) = scan(9)?;
    let turns = ys.windows(3).filter(|w| (w[1] - w[0]) * (w[2] - w[1]) < 0.0).count();
    let fallback = turns > 1;
    if fallback {
        (xs, ys) = scan(30)?;
    }
    let best = (0..ys.len()).fold(0, |b, i| if ys[i] > ys[b] { i } else { b });
    if best == 0 || best + 1 == xs.len() {
        return Ok(GateOptimum { omega_opt: xs[best].exp(), f_opt: ys[best], at_boundary: true, fallback });
    }
    let m = golden_max(fid, xs[best - 1], xs[best + 1], 1e-3)?;
    let (x, f) = if m.value >= ys[best] { (m.x, m.value) } else { (xs[best], ys[best]) };
    Ok(GateOptimum { omega_opt: x.exp(), f_opt: f, at_boundary: false, fallback })
}

/// One point of the generic scaling study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingPoint {
    /// Γ_S/Γ_eg
    pub ratio: f64,
    pub omega_opt: f64,
    pub infidelity: f64,
}

/// Optimized infidelity for Γ_eg = 1, Γ_S = ratio, Γ_AS = 2 − ratio.
pub fn gate_scaling(ratios: &[f64]) -> Result<Vec<ScalingPoint>> {
    use rayon::prelude::*;
    ratios
        .par_iter()
        .map(|&x| {
            if !(x > 0.0 && x < 1.0) {
                return Err(Error::Precondition(format!("Γ_S/Γ_eg = {x} must lie in (0, 1)")));
            }
            let o = gate_optimize(GateRates::new(x, 2.0 - x)?)?;
            Ok(ScalingPoint { ratio: x, omega_opt: o.omega_opt, infidelity: 1.0 - o.f_opt })
        })
        .collect()
}

/// Gate built on the nano-wire.
#[derive(Debug, Clone, PartialEq)]
pub struct NanowireGate {
    pub rates: RateMatrix2,
    pub optimum: GateOptimum,
}

/// Γ₁₁ and Γ₁₂ for radial emitters at `r_a`, axially `d` apart, then the
/// optimized gate. The coherent dipole-dipole shift is not included.
pub fn nanowire_gate_fidelity(sys: &WireSystem, r_a: f64, d: f64, q: &QuadratureSpec) -> Result<NanowireGate> {
    let e = Emitter::radial(r_a, 0.0, 0.0)?;
    let g11 = gamma_total(sys, &e, q)?.value;
    let g12 = gamma_cross(sys, &e, &e.shifted(d), q)?.value;
    let rates = RateMatrix2::new(g11, g12)?;
    let optimum = gate_optimize(GateRates::from_rate_matrix(&rates))?;
    Ok(NanowireGate { rates, optimum })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_limit_gives_truth_table() {
        let rates = GateRates::new(0.0, 1e4).unwrap();
        let out = gate_simulate(&GateParams::symmetric(1.0, rates), &gate_initial_state()).unwrap();
        assert!(out.fidelity > 0.99, "{}", out.fidelity);
        assert!(out.trace_drift < 1e-9);
    }

    #[test]
    fn equal_drives_leave_antisymmetric_undriven() {
        let gp = GateParams::symmetric(0.3, GateRates::new(0.1, 2.0).unwrap());
        assert_eq!(gp.omega_as(), 0.0);
        assert!((gp.omega_s() - 0.3 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn pulse_area_invariance_without_decay() {
        let rates = GateRates::new(0.0, 0.0).unwrap();
        let f: Vec<f64> = [0.5, 1.0, 3.0]
            .iter()
            .map(|&w| gate_simulate(&GateParams::symmetric(w, rates), &gate_initial_state()).unwrap().fidelity)
            .collect();
        assert!((f[0] - f[1]).abs() < 1e-7 && (f[1] - f[2]).abs() < 1e-7, "{f:?}");
    }

    #[test]
    fn optimum_is_interior_and_imperfect() {
        let o = gate_optimize(GateRates::new(0.01, 1.99).unwrap()).unwrap();
        assert!(!o.at_boundary);
        assert!(o.f_opt < 1.0 && o.f_opt > 0.5);
        assert!(o.omega_opt > 0.01 && o.omega_opt < 1.99);
    }

    #[test]
    fn gate_rejects_inverted_rates() {
        assert!(gate_optimize(GateRates::new(1.0, 0.5).unwrap()).is_err());
        assert!(GateRates::new(-1.0, 0.5).is_err());
    }
}
