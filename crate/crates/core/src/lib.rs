//! Electromagnetic response of a metallic nano-wire and the plasmon-mediated
//! dynamics of quantum emitters placed next to it.
//!
//! Lengths are measured in units of the reference vacuum wavelength λ₀ (so the
//! reference wavenumber is k₀ = 2π), and every decay rate is expressed in units
//! of the free-space rate Γ₀ at the same frequency.
//!
//! Layers, bottom-up:
//!
//! * [`specfun`]: Bessel and Hankel functions of integer order and complex argument.
//! * [`cylwave`]: cylindrical vector wave functions **M** and **N**.
//! * [`scatter`]: boundary-condition system at the wire surface and its determinant.
//! * [`greentensor`]: reflected/transmitted/direct Green tensor and its k_z quadrature.
//! * [`dispersion`]: guided plasmon roots and lossy resonance widths.
//! * [`emitters`]: decay rates, plasmon fraction and two-emitter cross rates.
//! * [`dynamics`]: Lindblad evolution, two-atom populations and the phase gate.

pub mod cylwave;
pub mod dispersion;
pub mod dynamics;
pub mod emitters;
mod error;
pub mod greentensor;
pub mod optimize;
pub mod quad;
pub mod scatter;
pub mod selftest;
pub mod specfun;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Reference vacuum wavenumber for λ₀ = 1.
pub const K0_REF: f64 = 2.0 * std::f64::consts::PI;
