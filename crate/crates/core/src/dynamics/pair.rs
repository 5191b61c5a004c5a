//! Two two-level atoms with a shared decay channel.
//!
//! Product basis index 2a + b for atom states a, b ∈ {g = 0, e = 1}, so the
//! order is |gg⟩, |ge⟩, |eg⟩, |ee⟩. With Γ₂₁ = Γ₁₂ the populations of
//! |ee⟩, |S⟩ = (|ge⟩+|eg⟩)/√2, |AS⟩ = (|ge⟩−|eg⟩)/√2 and |gg⟩ obey
//!
//! ```text
//! ρ̇_ee = −2Γ₁₁ ρ_ee
//! ρ̇_S  = Γ_S ρ_ee − Γ_S ρ_S          Γ_S  = Γ₁₁ + Γ₁₂
//! ρ̇_AS = Γ_AS ρ_ee − Γ_AS ρ_AS       Γ_AS = Γ₁₁ − Γ₁₂
//! ρ̇_gg = Γ_S ρ_S + Γ_AS ρ_AS
//! ```

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::lindblad::{CMatrix, DensityMatrix, Jump};
use crate::{Error, Result};

/// Decay rate matrix of two identical emitters (units Γ₀).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateMatrix2 {
    pub gamma11: f64,
    pub gamma12: f64,
}

impl RateMatrix2 {
    /// Requires Γ₁₁ > 0 and |Γ₁₂| ≤ Γ₁₁ (up to 1e-9 relative).
    pub fn new(gamma11: f64, gamma12: f64) -> Result<Self> {
        if !(gamma11 > 0.0 && gamma11.is_finite() && gamma12.is_finite()) {
            return Err(Error::Precondition(format!("Γ11 = {gamma11} must be positive")));
        }
        if gamma12.abs() > gamma11 * (1.0 + 1e-9) {
            return Err(Error::Precondition(format!(
                "|Γ12| = {} exceeds Γ11 = {gamma11}; the rate matrix is not positive",
                gamma12.abs()
            )));
        }
        Ok(Self { gamma11, gamma12: gamma12.clamp(-gamma11, gamma11) })
    }

    pub fn gamma_s(&self) -> f64 {
        self.gamma11 + self.gamma12
    }

    pub fn gamma_as(&self) -> f64 {
        self.gamma11 - self.gamma12
    }

    pub fn as_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[self.gamma11, self.gamma12, self.gamma12, self.gamma11])
    }
}

/// Populations in the collective basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairPopulations {
    pub ee: f64,
    pub s: f64,
    pub as_: f64,
    pub gg: f64,
}

impl PairPopulations {
    pub fn total(&self) -> f64 {
        self.ee + self.s + self.as_ + self.gg
    }
}

fn c(x: f64) -> Complex64 {
    Complex64::from(x)
}

/// |S⟩ and |AS⟩ in the product basis.
pub fn symmetric_state() -> DVector<Complex64> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    DVector::from_vec(vec![c(0.0), c(r), c(r), c(0.0)])
}

pub fn antisymmetric_state() -> DVector<Complex64> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    DVector::from_vec(vec![c(0.0), c(r), c(-r), c(0.0)])
}

/// Lowering operators σ₁ = |g⟩⟨e| ⊗ 1 and σ₂ = 1 ⊗ |g⟩⟨e| in the product basis.
pub fn pair_lowering() -> [CMatrix; 2] {
    let mut s1 = CMatrix::zeros(4, 4);
    let mut s2 = CMatrix::zeros(4, 4);
    for other in 0..2 {
        // atom 1 is the high bit
        s1[(other, 2 + other)] = c(1.0);
        s2[(2 * other, 2 * other + 1)] = c(1.0);
    }
    [s1, s2]
}

/// Collective channels σ_S = (σ₁+σ₂)/√2 with Γ_S and σ_AS = (σ₁−σ₂)/√2 with Γ_AS.
pub fn pair_channels(rm: &RateMatrix2) -> Vec<Jump> {
    let [s1, s2] = pair_lowering();
    let r = c(std::f64::consts::FRAC_1_SQRT_2);
    vec![
        Jump { op: (&s1 + &s2) * r, rate: rm.gamma_s() },
        Jump { op: (&s1 - &s2) * r, rate: rm.gamma_as() },
    ]
}

/// Populations of a pair density matrix in the collective basis.
pub fn collective_populations(rho: &DensityMatrix) -> Result<PairPopulations> {
    if rho.dim() != 4 {
        return Err(Error::Precondition(format!("pair density matrix must be 4×4, got {}", rho.dim())));
    }
    Ok(PairPopulations {
        ee: rho.population(3),
        s: rho.expectation(&symmetric_state()),
        as_: rho.expectation(&antisymmetric_state()),
        gg: rho.population(0),
    })
}

/// (1 − e^{−x})/x, continuous at 0.
fn phi1(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - 0.5 * x
    } else {
        -(-x).exp_m1() / x
    }
}

/// Closed-form populations at time `t` from an initial state diagonal in the
/// collective basis.
pub fn pair_populations(rm: &RateMatrix2, initial: &DensityMatrix, t: f64) -> Result<PairPopulations> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Precondition(format!("time {t} must be nonnegative")));
    }
    let p0 = collective_populations(initial)?;
    // off-diagonal elements in the collective basis must vanish
    let basis = [
        DVector::from_vec(vec![c(0.0), c(0.0), c(0.0), c(1.0)]),
        symmetric_state(),
        antisymmetric_state(),
        DVector::from_vec(vec![c(1.0), c(0.0), c(0.0), c(0.0)]),
    ];
    for i in 0..4 {
        for j in i + 1..4 {
            let z = (basis[i].adjoint() * &initial.0 * &basis[j])[(0, 0)];
            if z.norm() > 1e-12 {
                return Err(Error::Precondition(format!(
                    "initial state has coherence {z} between collective states {i} and {j}"
                )));
            }
        }
    }
    let g2 = 2.0 * rm.gamma11;
    let ee = p0.ee * (-g2 * t).exp();
    // ρ_X = X₀ e^{−Γt} + Γ ee₀ (e^{−Γt} − e^{−2Γ₁₁t})/(2Γ₁₁ − Γ)
    let feed = |gamma: f64, x0: f64| -> f64 {
        let decay = (-gamma * t).exp();
        x0 * decay + gamma * p0.ee * decay * t * phi1((g2 - gamma) * t)
    };
    let s = feed(rm.gamma_s(), p0.s);
    let as_ = feed(rm.gamma_as(), p0.as_);
    let gg = p0.total() - ee - s - as_;
    Ok(PairPopulations { ee, s, as_, gg })
}
