//! Boundary-value problem at the wire surface r = R.
//!
//! For one harmonic order n and one longitudinal wavenumber k_z a source
//! outside the wire illuminates it with regular waves. The even-parity source
//! columns are
//!
//! * **M-column**: incident M_e, reflected `a_r M_e^(1) + b_r N_o^(1)`,
//!   transmitted `a_t M_e + b_t N_o` (wavenumber k₁ inside);
//! * **N-column**: incident N_e, reflected `c_r N_e^(1) + d_r M_o^(1)`,
//!   transmitted `c_t N_e + d_t M_o`.
//!
//! Continuity of the φ and z components of the field and of its curl
//! (∇×M = kN, ∇×N = kM) gives four equations per column; the eight unknowns
//! form a block-diagonal 8×8 system. Odd-parity sources and the reversed
//! wavenumber −k_z share the same a, c coefficients while b and d change sign.
//!
//! The unknowns are stored in a normalized form so that evanescent arguments
//! neither overflow nor underflow. With s₀ = Im k_r0 and s₁ = |Im k_r1|:
//!
//! ```text
//! a_r = â_r · exp(s₀R − i k_r0 R)      (same for b_r, c_r, d_r)
//! a_t = â_t · exp((s₀ − s₁) R)          (same for b_t, c_t, d_t)
//! ```
//!
//! and all Bessel/Hankel functions enter through their exponentially scaled
//! versions. [`ScatterCoeffs`] holds the hatted values.

use nalgebra::{Matrix4, SMatrix, SVector, Vector4};
use num_complex::Complex64;

use crate::cylwave::{m_pattern, n_pattern, radial_wavenumber, FieldPattern, ModeParams, Parity, Trig};
use crate::specfun::{self, ValueDeriv};
use crate::{Error, Result};

/// Condition number beyond which the boundary system is treated as singular.
pub const MAX_CONDITION: f64 = 1.0e12;

/// Geometry and material of the wire. Lengths in units of the reference
/// wavelength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WireSystem {
    pub radius: f64,
    pub eps: Complex64,
    pub wavelength: f64,
}

impl WireSystem {
    pub fn new(radius: f64, eps: Complex64) -> Result<Self> {
        Self::with_wavelength(radius, eps, 1.0)
    }

    pub fn with_wavelength(radius: f64, eps: Complex64, wavelength: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Precondition(format!("wire radius must be positive, got {radius}")));
        }
        if eps.im < 0.0 || !eps.re.is_finite() || !eps.im.is_finite() {
            return Err(Error::Precondition(format!("permittivity must be passive (Im eps >= 0), got {eps}")));
        }
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::Precondition(format!("wavelength must be positive, got {wavelength}")));
        }
        Ok(Self { radius, eps, wavelength })
    }

    /// Reference vacuum wavenumber 2π/λ₀.
    pub fn k0(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength
    }

    pub fn is_lossless(&self) -> bool {
        self.eps.im == 0.0
    }

    /// The same wire with Im ε dropped.
    pub fn lossless(&self) -> Self {
        Self { eps: Complex64::new(self.eps.re, 0.0), ..*self }
    }

    pub fn with_eps(&self, eps: Complex64) -> Result<Self> {
        Self::with_wavelength(self.radius, eps, self.wavelength)
    }

    pub fn with_radius(&self, radius: f64) -> Result<Self> {
        Self::with_wavelength(radius, self.eps, self.wavelength)
    }

    /// Wavenumber inside the metal, √ε k (principal root, Im ≥ 0).
    pub fn k_inside(&self, k0: f64) -> Complex64 {
        self.eps.sqrt() * k0
    }
}

/// The eight normalized reflection/transmission amplitudes for an even-parity
/// source at (n, k_z, ω). See the module docs for the normalization.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScatterCoeffs {
    pub a_r: Complex64,
    pub b_r: Complex64,
    pub c_r: Complex64,
    pub d_r: Complex64,
    pub a_t: Complex64,
    pub b_t: Complex64,
    pub c_t: Complex64,
    pub d_t: Complex64,
}

impl ScatterCoeffs {
    fn from_vectors(m: &Vector4<Complex64>, n: &Vector4<Complex64>) -> Self {
        Self { a_r: m[0], b_r: m[1], a_t: m[2], b_t: m[3], c_r: n[0], d_r: n[1], c_t: n[2], d_t: n[3] }
    }

    /// Coefficients for the opposite source parity, which are also the
    /// coefficients at −k_z: the cross-polarized amplitudes b and d flip sign.
    pub fn cross_flipped(&self) -> Self {
        Self { b_r: -self.b_r, d_r: -self.d_r, b_t: -self.b_t, d_t: -self.d_t, ..*self }
    }

    pub fn for_parity(&self, parity: Parity) -> Self {
        match parity {
            Parity::Even => *self,
            Parity::Odd => self.cross_flipped(),
        }
    }

    pub fn as_array(&self) -> [Complex64; 8] {
        [self.a_r, self.b_r, self.a_t, self.b_t, self.c_r, self.d_r, self.c_t, self.d_t]
    }
}

/// Scaled radial functions at the wire surface for one (n, k_z, ω).
#[derive(Debug, Clone, Copy)]
pub struct Surface {
    pub outside: ModeParams,
    pub inside: ModeParams,
    pub k0: f64,
    pub radius: f64,
    /// exp(-|Im|)-scaled J_n(k_r0 R)
    pub j_out: ValueDeriv,
    /// exp(-iz)-scaled H_n(k_r0 R)
    pub h_out: ValueDeriv,
    /// exp(-|Im|)-scaled J_n(k_r1 R)
    pub j_in: ValueDeriv,
}

impl Surface {
    pub fn new(sys: &WireSystem, n: u32, kz: Complex64, k0: f64) -> Result<Self> {
        let outside = ModeParams::new(n, kz, Complex64::new(k0, 0.0));
        let inside = ModeParams::new(n, kz, sys.k_inside(k0));
        let r = sys.radius;
        let ni = n as i32;
        Ok(Self {
            outside,
            inside,
            k0,
            radius: r,
            j_out: specfun::bessel_j_pair_scaled(ni, outside.kr * r)?,
            h_out: specfun::hankel1_pair_scaled(ni, outside.kr * r)?,
            j_in: specfun::bessel_j_pair_scaled(ni, inside.kr * r)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Wave {
    M,
    N,
}

impl Wave {
    fn dual(self) -> Wave {
        match self {
            Wave::M => Wave::N,
            Wave::N => Wave::M,
        }
    }
}

fn pattern(w: Wave, parity: Parity, mp: &ModeParams, r: f64, zv: ValueDeriv) -> FieldPattern {
    match w {
        Wave::M => m_pattern(parity, mp, r, zv),
        Wave::N => n_pattern(parity, mp, r, zv),
    }
}

/// Tangential (φ, z) components of the field and of its curl: [E_φ, E_z, H_φ, H_z].
fn tangential(w: Wave, parity: Parity, mp: &ModeParams, r: f64, zv: ValueDeriv) -> ([Complex64; 4], [Trig; 4]) {
    let e = pattern(w, parity, mp, r, zv);
    let h = pattern(w.dual(), parity, mp, r, zv).scale(mp.k);
    ([e.coef[1], e.coef[2], h.coef[1], h.coef[2]], [e.trig[1], e.trig[2], h.trig[1], h.trig[2]])
}

/// The 4×4 block and source vector for a `src`-type incident wave of the given parity.
fn column_block(s: &Surface, src: Wave, parity: Parity) -> (Matrix4<Complex64>, Vector4<Complex64>) {
    let r = s.radius;
    let (inc, inc_trig) = tangential(src, parity, &s.outside, r, s.j_out);
    let cols = [
        tangential(src, parity, &s.outside, r, s.h_out),
        tangential(src.dual(), parity.flip(), &s.outside, r, s.h_out),
        tangential(src, parity, &s.inside, r, s.j_in),
        tangential(src.dual(), parity.flip(), &s.inside, r, s.j_in),
    ];
    let mut m = Matrix4::zeros();
    let mut rhs = Vector4::zeros();
    for row in 0..4 {
        rhs[row] = -inc[row];
        for (j, (vals, trig)) in cols.iter().enumerate() {
            debug_assert!(vals[row] == Complex64::new(0.0, 0.0) || inc[row] == Complex64::new(0.0, 0.0) || trig[row] == inc_trig[row]);
            m[(row, j)] = if j < 2 { vals[row] } else { -vals[row] };
        }
    }
    (m, rhs)
}

/// Divide each row (and its source entry) by the row's largest matrix entry.
fn equilibrate(m: &mut Matrix4<Complex64>, rhs: &mut Vector4<Complex64>) {
    for row in 0..4 {
        let scale = (0..4).map(|j| m[(row, j)].norm()).fold(0.0, f64::max);
        if scale > 0.0 {
            for j in 0..4 {
                m[(row, j)] /= scale;
            }
            rhs[row] /= scale;
        }
    }
}

fn norm1(m: &Matrix4<Complex64>) -> f64 {
    (0..4).map(|j| (0..4).map(|i| m[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max)
}

fn solve_block(mut m: Matrix4<Complex64>, mut rhs: Vector4<Complex64>, n: u32, kz: Complex64) -> Result<Vector4<Complex64>> {
    equilibrate(&mut m, &mut rhs);
    // column scaling: near the light line outgoing and regular columns differ by many decades
    let mut col_scale = [1.0; 4];
    for (j, cs) in col_scale.iter_mut().enumerate() {
        let s = (0..4).map(|i| m[(i, j)].norm()).fold(0.0, f64::max);
        if s > 0.0 {
            *cs = 1.0 / s;
            for i in 0..4 {
                m[(i, j)] *= *cs;
            }
        }
    }
    let inv = m.try_inverse().ok_or(Error::NearPole { n, kz: kz.re, cond: f64::INFINITY })?;
    let cond = norm1(&m) * norm1(&inv);
    if !(cond <= MAX_CONDITION) {
        return Err(Error::NearPole { n, kz: kz.re, cond });
    }
    let mut x = inv * rhs;
    for j in 0..4 {
        x[j] *= col_scale[j];
    }
    Ok(x)
}

/// Assembled 8×8 system (block diagonal: M-column then N-column) and its source
/// term, for an even-parity source. Unknown order: a_r, b_r, a_t, b_t, c_r, d_r, c_t, d_t.
#[derive(Debug, Clone)]
pub struct BoundarySystem {
    pub matrix: SMatrix<Complex64, 8, 8>,
    pub rhs: SVector<Complex64, 8>,
}

pub fn boundary_matrix(sys: &WireSystem, n: u32, kz: Complex64, k0: f64) -> Result<BoundarySystem> {
    let s = Surface::new(sys, n, kz, k0)?;
    let (mm, mr) = column_block(&s, Wave::M, Parity::Even);
    let (nm, nr) = column_block(&s, Wave::N, Parity::Even);
    let mut matrix = SMatrix::<Complex64, 8, 8>::zeros();
    let mut rhs = SVector::<Complex64, 8>::zeros();
    matrix.fixed_view_mut::<4, 4>(0, 0).copy_from(&mm);
    matrix.fixed_view_mut::<4, 4>(4, 4).copy_from(&nm);
    rhs.fixed_rows_mut::<4>(0).copy_from(&mr);
    rhs.fixed_rows_mut::<4>(4).copy_from(&nr);
    Ok(BoundarySystem { matrix, rhs })
}

/// Coefficients for an even-parity source from precomputed surface values.
pub fn solve_surface(s: &Surface) -> Result<ScatterCoeffs> {
    solve_surface_parity(s, Parity::Even)
}

pub fn solve_surface_parity(s: &Surface, parity: Parity) -> Result<ScatterCoeffs> {
    let n = s.outside.n;
    let kz = s.outside.kz;
    let (mm, mr) = column_block(s, Wave::M, parity);
    let (nm, nr) = column_block(s, Wave::N, parity);
    let xm = solve_block(mm, mr, n, kz)?;
    let xn = solve_block(nm, nr, n, kz)?;
    Ok(ScatterCoeffs::from_vectors(&xm, &xn))
}

/// Reflection/transmission coefficients for an even-parity source.
pub fn solve_coeffs(sys: &WireSystem, n: u32, kz: Complex64, k0: f64) -> Result<ScatterCoeffs> {
    solve_surface(&Surface::new(sys, n, kz, k0)?)
}

/// Same as [`solve_coeffs`] but solving the requested source parity directly.
pub fn solve_coeffs_parity(sys: &WireSystem, n: u32, kz: Complex64, k0: f64, parity: Parity) -> Result<ScatterCoeffs> {
    solve_surface_parity(&Surface::new(sys, n, kz, k0)?, parity)
}

/// Determinant of the source-free M-column system with every row scaled by
/// its largest entry. Its zeros in k_z are the guided modes of order n (the
/// N-column block has the same zeros up to a rotation of the parity).
pub fn mode_determinant(sys: &WireSystem, n: u32, kz: Complex64, k0: f64) -> Result<Complex64> {
    let s = Surface::new(sys, n, kz, k0)?;
    let (mut m, mut rhs) = column_block(&s, Wave::M, Parity::Even);
    equilibrate(&mut m, &mut rhs);
    Ok(m.determinant())
}

/// Relative mismatch of the tangential field and curl across r = R, with the
/// solved coefficients substituted into the full vector wave functions and
/// evaluated at a generic azimuth. Both source columns and both parities are
/// checked; the result is the worst relative residual.
pub fn boundary_residual(sys: &WireSystem, n: u32, kz: Complex64, k0: f64, coeffs: &ScatterCoeffs) -> Result<f64> {
    let s = Surface::new(sys, n, kz, k0)?;
    let r = s.radius;
    let phi = 0.731;
    let mut worst: f64 = 0.0;
    for parity in [Parity::Even, Parity::Odd] {
        let c = coeffs.for_parity(parity);
        for src in [Wave::M, Wave::N] {
            let (ar, br, at, bt) = match src {
                Wave::M => (c.a_r, c.b_r, c.a_t, c.b_t),
                Wave::N => (c.c_r, c.d_r, c.c_t, c.d_t),
            };
            let field = |w: Wave, par: Parity, mp: &ModeParams, zv: ValueDeriv| {
                let e = pattern(w, par, mp, r, zv).at(n, kz, phi, 0.0);
                let h = pattern(w.dual(), par, mp, r, zv).scale(mp.k).at(n, kz, phi, 0.0);
                [e.phi, e.z, h.phi, h.z]
            };
            let inc = field(src, parity, &s.outside, s.j_out);
            let o1 = field(src, parity, &s.outside, s.h_out);
            let o2 = field(src.dual(), parity.flip(), &s.outside, s.h_out);
            let i1 = field(src, parity, &s.inside, s.j_in);
            let i2 = field(src.dual(), parity.flip(), &s.inside, s.j_in);
            for k in 0..4 {
                let outside = inc[k] + ar * o1[k] + br * o2[k];
                let inside = at * i1[k] + bt * i2[k];
                let scale = inc[k].norm().max((ar * o1[k]).norm()).max((at * i1[k]).norm()).max(1e-300);
                let row_scale = [inc, o1, o2, i1, i2].iter().map(|v| v[k].norm()).fold(0.0, f64::max);
                if row_scale == 0.0 {
                    continue;
                }
                worst = worst.max((outside - inside).norm() / scale.max(row_scale * 1e-3));
            }
        }
    }
    Ok(worst)
}

/// Radial wavenumbers (outside, inside) for a given k_z.
pub fn radial_wavenumbers(sys: &WireSystem, kz: Complex64, k0: f64) -> (Complex64, Complex64) {
    (radial_wavenumber(Complex64::new(k0, 0.0), kz), radial_wavenumber(sys.k_inside(k0), kz))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const K0: f64 = crate::K0_REF;

    #[test]
    fn vacuum_wire_reflects_nothing() {
        let sys = WireSystem::new(0.05, c(1.0, 0.0)).unwrap();
        for n in 0..4 {
            for kz in [0.3 * K0, 2.0 * K0] {
                let cf = solve_coeffs(&sys, n, c(kz, 0.0), K0).unwrap();
                for v in [cf.a_r, cf.b_r, cf.c_r, cf.d_r] {
                    assert!(v.norm() < 1e-12, "n={n} kz={kz}: {v}");
                }
            }
        }
    }

    #[test]
    fn lossy_residual_is_small() {
        let sys = WireSystem::new(0.02, c(-75.0, 0.6)).unwrap();
        for n in 0..5 {
            for kz in [0.2, 0.9, 1.5, 4.0, 20.0] {
                let kz = c(kz * K0, 0.0);
                let cf = solve_coeffs(&sys, n, kz, K0).unwrap();
                let res = boundary_residual(&sys, n, kz, K0, &cf).unwrap();
                assert!(res < 1e-9, "n={n} kz={kz}: residual {res}");
            }
        }
    }

    #[test]
    fn order_zero_decouples_te_and_tm() {
        let sys = WireSystem::new(0.03, c(-75.0, 0.6)).unwrap();
        let bs = boundary_matrix(&sys, 0, c(1.7 * K0, 0.0), K0).unwrap();
        // TE unknowns: a_r, a_t, d_r, d_t; TM unknowns: b_r, b_t, c_r, c_t
        let te = [0usize, 2, 5, 7];
        let tm = [1usize, 3, 4, 6];
        // TE rows: E_phi and H_z of both columns
        let te_rows = [0usize, 3, 4, 7];
        let tm_rows = [1usize, 2, 5, 6];
        let scale = bs.matrix.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for &i in &te_rows {
            for &j in &tm {
                assert!(bs.matrix[(i, j)].norm() < 1e-12 * scale);
            }
        }
        for &i in &tm_rows {
            for &j in &te {
                assert!(bs.matrix[(i, j)].norm() < 1e-12 * scale);
            }
        }
        // and the coupling is genuinely present for n = 1
        let bs1 = boundary_matrix(&sys, 1, c(1.7 * K0, 0.0), K0).unwrap();
        let coupling: f64 = te_rows.iter().flat_map(|&i| tm.iter().map(move |&j| (i, j))).map(|(i, j)| bs1.matrix[(i, j)].norm()).sum();
        assert!(coupling > 1e-6 * scale);
    }

    #[test]
    fn odd_parity_and_reversed_kz_flip_cross_terms() {
        let sys = WireSystem::new(0.02, c(-75.0, 0.6)).unwrap();
        for n in 1..4 {
            let kz = c(2.3 * K0, 0.0);
            let even = solve_coeffs(&sys, n, kz, K0).unwrap();
            let odd = solve_coeffs_parity(&sys, n, kz, K0, Parity::Odd).unwrap();
            let rev = solve_coeffs(&sys, n, -kz, K0).unwrap();
            let flipped = even.cross_flipped();
            for (a, b) in flipped.as_array().iter().zip(odd.as_array()) {
                assert!((a - b).norm() < 1e-10 * (1.0 + b.norm()));
            }
            for (a, b) in flipped.as_array().iter().zip(rev.as_array()) {
                assert!((a - b).norm() < 1e-10 * (1.0 + b.norm()));
            }
        }
    }

    #[test]
    fn rejects_unphysical_wires() {
        assert!(WireSystem::new(-1.0, c(-75.0, 0.6)).is_err());
        assert!(WireSystem::new(0.1, c(-75.0, -0.6)).is_err());
    }
}
