//! Cylindrical vector wave functions.
//!
//! With the scalar generator ψ = Z_n(k_r r) {cos nφ | sin nφ} e^{i k_z z},
//! M = ∇ × (ψ ẑ) and N = (1/k) ∇ × M. Expanding the curls gives, for the even
//! parity (Z and Z' evaluated at k_r r):
//!
//! ```text
//! M_e:  r: -(n/r) Z sin nφ        φ: -k_r Z' cos nφ            z: 0
//! N_e:  r: (i k_z k_r / k) Z' cos  φ: -(i k_z n / (k r)) Z sin  z: (k_r² / k) Z cos
//! ```
//!
//! and for the odd parity
//!
//! ```text
//! M_o:  r: (n/r) Z cos nφ         φ: -k_r Z' sin nφ            z: 0
//! N_o:  r: (i k_z k_r / k) Z' sin  φ: (i k_z n / (k r)) Z cos   z: (k_r² / k) Z sin
//! ```
//!
//! every component carrying the common factor e^{i k_z z}. Components are in
//! the local cylindrical frame (r̂, φ̂, ẑ) of the evaluation point.

use num_complex::Complex64;

use crate::specfun::{self, ValueDeriv};
use crate::{Error, Result};

/// Radial function: J_n (regular at the axis) or H_n^(1) (outgoing).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RadialKind {
    Regular,
    Outgoing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    /// cos nφ generator
    Even,
    /// sin nφ generator
    Odd,
}

impl Parity {
    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WaveKind {
    pub radial: RadialKind,
    pub parity: Parity,
}

impl WaveKind {
    pub fn new(radial: RadialKind, parity: Parity) -> Self {
        Self { radial, parity }
    }
}

/// Radial wavenumber √(k² − k_z²) on the branch Im ≥ 0 (Re ≥ 0 when purely real).
pub fn radial_wavenumber(k: Complex64, kz: Complex64) -> Complex64 {
    let mut kr = (k * k - kz * kz).sqrt();
    if kr.im < 0.0 || (kr.im == 0.0 && kr.re < 0.0) {
        kr = -kr;
    }
    kr
}

/// One term of the cylindrical expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeParams {
    pub n: u32,
    pub kz: Complex64,
    /// Wavenumber of the medium the wave lives in.
    pub k: Complex64,
    pub kr: Complex64,
}

impl ModeParams {
    pub fn new(n: u32, kz: Complex64, k: Complex64) -> Self {
        Self { n, kz, k, kr: radial_wavenumber(k, kz) }
    }

    /// Same mode travelling the other way along the axis.
    pub fn reversed(&self) -> Self {
        Self { kz: -self.kz, ..*self }
    }
}

/// Point in cylindrical coordinates about the wire axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylPoint {
    pub r: f64,
    pub phi: f64,
    pub z: f64,
}

impl CylPoint {
    pub fn new(r: f64, phi: f64, z: f64) -> Self {
        debug_assert!(r >= 0.0);
        Self { r, phi, z }
    }

    pub fn to_cartesian(&self) -> [f64; 3] {
        [self.r * self.phi.cos(), self.r * self.phi.sin(), self.z]
    }

    pub fn from_cartesian(p: [f64; 3]) -> Self {
        Self { r: p[0].hypot(p[1]), phi: p[1].atan2(p[0]), z: p[2] }
    }
}

/// Complex vector in the local cylindrical frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CylVector {
    pub r: Complex64,
    pub phi: Complex64,
    pub z: Complex64,
}

impl CylVector {
    pub fn new(r: Complex64, phi: Complex64, z: Complex64) -> Self {
        Self { r, phi, z }
    }

    /// Components in the global Cartesian frame, given the azimuth of the point.
    pub fn to_cartesian(&self, phi: f64) -> [Complex64; 3] {
        let (s, c) = phi.sin_cos();
        [self.r * c - self.phi * s, self.r * s + self.phi * c, self.z]
    }

    pub fn norm(&self) -> f64 {
        (self.r.norm_sqr() + self.phi.norm_sqr() + self.z.norm_sqr()).sqrt()
    }

    pub fn scale(&self, a: Complex64) -> Self {
        Self { r: self.r * a, phi: self.phi * a, z: self.z * a }
    }
}

impl std::ops::Sub for CylVector {
    type Output = CylVector;
    fn sub(self, o: CylVector) -> CylVector {
        CylVector { r: self.r - o.r, phi: self.phi - o.phi, z: self.z - o.z }
    }
}

impl std::ops::Add for CylVector {
    type Output = CylVector;
    fn add(self, o: CylVector) -> CylVector {
        CylVector { r: self.r + o.r, phi: self.phi + o.phi, z: self.z + o.z }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trig {
    Cos,
    Sin,
}

impl Trig {
    fn eval(self, x: f64) -> f64 {
        match self {
            Trig::Cos => x.cos(),
            Trig::Sin => x.sin(),
        }
    }
}

/// A wave function at fixed r with the angular factor and e^{i k_z z} stripped:
/// component `i` equals `coef[i] * trig[i](nφ) * e^{i k_z z}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldPattern {
    pub coef: [Complex64; 3],
    pub trig: [Trig; 3],
}

impl FieldPattern {
    pub fn at(&self, n: u32, kz: Complex64, phi: f64, z: f64) -> CylVector {
        let nphi = n as f64 * phi;
        let axial = (Complex64::i() * kz * z).exp();
        let c = |i: usize| self.coef[i] * self.trig[i].eval(nphi) * axial;
        CylVector::new(c(0), c(1), c(2))
    }

    pub fn scale(&self, a: Complex64) -> Self {
        Self { coef: self.coef.map(|c| c * a), trig: self.trig }
    }
}

/// (n/r) Z_n(k_r r), with its finite limit at the axis for the regular kind.
fn n_over_r(n: u32, mp: &ModeParams, r: f64, zv: Complex64) -> Complex64 {
    if r > 0.0 {
        zv * (n as f64 / r)
    } else if n == 1 {
        // J_1(x)/x -> 1/2
        mp.kr * 0.5
    } else {
        Complex64::new(0.0, 0.0)
    }
}

/// M pattern from precomputed Z_n(k_r r) and Z_n'(k_r r) (scaled or not).
pub fn m_pattern(parity: Parity, mp: &ModeParams, r: f64, z: ValueDeriv) -> FieldPattern {
    let nr = n_over_r(mp.n, mp, r, z.value);
    let zero = Complex64::new(0.0, 0.0);
    let phi = -mp.kr * z.deriv;
    match parity {
        Parity::Even => FieldPattern { coef: [-nr, phi, zero], trig: [Trig::Sin, Trig::Cos, Trig::Cos] },
        Parity::Odd => FieldPattern { coef: [nr, phi, zero], trig: [Trig::Cos, Trig::Sin, Trig::Sin] },
    }
}

/// N pattern from precomputed Z_n(k_r r) and Z_n'(k_r r) (scaled or not).
pub fn n_pattern(parity: Parity, mp: &ModeParams, r: f64, z: ValueDeriv) -> FieldPattern {
    let i = Complex64::i();
    let nr = n_over_r(mp.n, mp, r, z.value);
    let radial = i * mp.kz * mp.kr / mp.k * z.deriv;
    let azim = i * mp.kz / mp.k * nr;
    let axial = mp.kr * mp.kr / mp.k * z.value;
    match parity {
        Parity::Even => FieldPattern { coef: [radial, -azim, axial], trig: [Trig::Cos, Trig::Sin, Trig::Cos] },
        Parity::Odd => FieldPattern { coef: [radial, azim, axial], trig: [Trig::Sin, Trig::Cos, Trig::Sin] },
    }
}

/// Unscaled Z_n and Z_n' at k_r r.
pub fn radial_values(radial: RadialKind, mp: &ModeParams, r: f64) -> Result<ValueDeriv> {
    let n = mp.n as i32;
    let x = mp.kr * r;
    match radial {
        RadialKind::Regular => specfun::bessel_j_pair(n, x),
        RadialKind::Outgoing => {
            if r <= 0.0 {
                return Err(Error::Domain("outgoing wave function evaluated on the axis".into()));
            }
            specfun::hankel1_pair(n, x)
        }
    }
}

/// M_{e|o,n}(k_z, p) (regular or outgoing).
pub fn eval_m(kind: WaveKind, mp: &ModeParams, p: CylPoint) -> Result<CylVector> {
    let zv = radial_values(kind.radial, mp, p.r)?;
    Ok(m_pattern(kind.parity, mp, p.r, zv).at(mp.n, mp.kz, p.phi, p.z))
}

/// N_{e|o,n}(k_z, p) = (1/k) ∇ × M.
pub fn eval_n(kind: WaveKind, mp: &ModeParams, p: CylPoint) -> Result<CylVector> {
    let zv = radial_values(kind.radial, mp, p.r)?;
    Ok(n_pattern(kind.parity, mp, p.r, zv).at(mp.n, mp.kz, p.phi, p.z))
}
