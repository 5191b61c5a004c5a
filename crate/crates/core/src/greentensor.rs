//! Green tensor of the wire: the closed-form free-space part, the reflected
//! part outside the wire and the transmitted part inside it.
//!
//! The scattered parts are expansions over harmonic order n and longitudinal
//! wavenumber k_z,
//!
//! ```text
//! G_R(r, r') = (i/8π) ∫ dk_z Σ_n (2 − δ_n0)/k_r0² Σ_{p=e,o}
//!     [ (a M_p⁽¹⁾ + b N_p̄⁽¹⁾)(k_z, r) ⊗ M_p⁽¹⁾(−k_z, r')
//!     + (c N_p⁽¹⁾ + d M_p̄⁽¹⁾)(k_z, r) ⊗ N_p⁽¹⁾(−k_z, r') ]
//! ```
//!
//! (regular waves and transmission amplitudes replace the outgoing ones when
//! r < R). The vectors are converted to Cartesian components at their own
//! azimuth before the outer product, so the result is in the global frame.
//!
//! The k_z integral is folded onto [0, ∞) by adding the −k_z integrand, which
//! shares the boundary solve with +k_z (only b and d change sign). The
//! evanescent range gets breakpoints around each guided root, and beyond the
//! main cutoff it is continued with doubling panels until the tail is
//! negligible.

use std::collections::HashMap;
use std::sync::Mutex;

use nalgebra::Matrix3;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::cylwave::{m_pattern, n_pattern, CylPoint, FieldPattern, ModeParams, Parity};
use crate::dispersion::peak_breakpoints;
use crate::quad::{integrate, max_norm, QuadOptions};
use crate::scatter::{solve_surface, ScatterCoeffs, Surface, WireSystem};
use crate::specfun::{self, ValueDeriv};
use crate::{Error, Result};

pub type CMatrix3 = Matrix3<Complex64>;

/// Highest harmonic order the n-sum may reach.
pub const N_MAX_LIMIT: u32 = 63;

/// Controls for the k_z quadrature and the n-sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    /// Absolute floor for the error target (max-norm of the tensor).
    pub abs_tol: f64,
    /// Fixed upper limit for |k_z|; `None` selects the adaptive tail.
    pub cutoff: Option<f64>,
    pub n_max: u32,
    pub peak_refinement: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { rel_tol: 1e-6, abs_tol: 0.0, cutoff: None, n_max: 60, peak_refinement: true }
    }
}

impl QuadratureSpec {
    pub fn with_rel_tol(self, rel_tol: f64) -> Self {
        Self { rel_tol, ..self }
    }

    /// Check the tolerances, cutoff and order limit.
    pub fn validate(&self, k0: f64) -> Result<()> {
        if !(self.rel_tol > 0.0) || self.abs_tol < 0.0 {
            return Err(Error::Precondition("quadrature tolerance must be positive".into()));
        }
        if let Some(c) = self.cutoff {
            if !(c > k0) {
                return Err(Error::Precondition(format!("k_z cutoff {c} must exceed k0 = {k0}")));
            }
        }
        if self.n_max > N_MAX_LIMIT {
            return Err(Error::Precondition(format!("n_max {} exceeds {N_MAX_LIMIT}", self.n_max)));
        }
        Ok(())
    }
}

/// Which part of the k_z axis to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KzRegion {
    /// |k_z| ≤ k₀
    Traveling,
    /// |k_z| > k₀
    Evanescent,
    All,
}

/// A Green tensor value in the global Cartesian frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenSample {
    pub matrix: CMatrix3,
    pub obs: CylPoint,
    pub src: CylPoint,
    pub k0: f64,
    /// Estimated absolute quadrature error of the imaginary part (max-norm).
    /// The real part is integrated on the same nodes without its own error
    /// control.
    pub error: f64,
    /// Number of harmonic orders summed.
    pub orders: u32,
}

/// Reflected tensor split at |k_z| = k₀.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenSplit {
    pub traveling: GreenSample,
    pub evanescent: GreenSample,
}

impl GreenSplit {
    pub fn total(&self) -> GreenSample {
        GreenSample {
            matrix: self.traveling.matrix + self.evanescent.matrix,
            error: self.traveling.error + self.evanescent.error,
            orders: self.traveling.orders.max(self.evanescent.orders),
            ..self.traveling
        }
    }
}

fn outer(u: &[Complex64; 3], v: &[Complex64; 3]) -> CMatrix3 {
    CMatrix3::from_fn(|i, j| u[i] * v[j])
}

fn cart(p: &FieldPattern, mp: &ModeParams, pt: CylPoint) -> [Complex64; 3] {
    p.at(mp.n, mp.kz, pt.phi, pt.z).to_cartesian(pt.phi)
}

fn axpy(a: Complex64, x: &[Complex64; 3], b: Complex64, y: &[Complex64; 3]) -> [Complex64; 3] {
    [a * x[0] + b * y[0], a * x[1] + b * y[1], a * x[2] + b * y[2]]
}

/// Magnitudes |Z| + |Z'| of the scaled radial functions at the surface.
#[derive(Debug, Clone, Copy)]
struct SurfaceNorms {
    j_out: f64,
    h_out: f64,
    j_in: f64,
}

fn divide(v: ValueDeriv, by: f64) -> ValueDeriv {
    ValueDeriv { value: v.value / by, deriv: v.deriv / by }
}

/// Divide each surface function by its magnitude. High orders near the light
/// line have J ~ x^n and H ~ x^-n far outside the double range when formed
/// as separate factors; the kernel only needs the normalized functions and
/// the product of the norms.
fn normalized_surface(mut s: Surface) -> (Surface, SurfaceNorms) {
    let mag = |v: &ValueDeriv| v.value.norm() + v.deriv.norm();
    let norms = SurfaceNorms { j_out: mag(&s.j_out), h_out: mag(&s.h_out), j_in: mag(&s.j_in) };
    s.j_out = divide(s.j_out, norms.j_out);
    s.h_out = divide(s.h_out, norms.h_out);
    s.j_in = divide(s.j_in, norms.j_in);
    (s, norms)
}

/// Boundary solve plus the radial functions at both points for one (n, k_z);
/// reused for +k_z and −k_z. The amplitudes refer to the normalized surface
/// functions, and `factor` carries the norms back in.
struct KernelSetup {
    surface: Surface,
    coeffs: ScatterCoeffs,
    obs_vals: ValueDeriv,
    src_vals: ValueDeriv,
    inside: bool,
    /// Exponential factor restoring the scaled functions and amplitudes.
    factor: Complex64,
}

impl KernelSetup {
    fn new(sys: &WireSystem, n: u32, kz: f64, k0: f64, obs: CylPoint, src: CylPoint) -> Result<Self> {
        let r_wire = sys.radius;
        if !(src.r > r_wire) {
            return Err(Error::Precondition(format!("source must be outside the wire (r' = {} <= R = {r_wire})", src.r)));
        }
        if obs.r == r_wire {
            return Err(Error::Precondition("observation point on the wire surface".into()));
        }
        let (surface, norms) = normalized_surface(Surface::new(sys, n, Complex64::new(kz, 0.0), k0)?);
        let coeffs = solve_surface(&surface)?;
        let ni = n as i32;
        let kr0 = surface.outside.kr;
        let s0 = kr0.im;
        let i = Complex64::i();
        let src_vals = divide(specfun::hankel1_pair_scaled(ni, kr0 * src.r)?, norms.h_out);
        let inside = obs.r < r_wire;
        let (obs_vals, factor) = if inside {
            let kr1 = surface.inside.kr;
            let s1 = kr1.im.abs();
            let v = divide(specfun::bessel_j_pair_scaled(ni, kr1 * obs.r)?, norms.j_in);
            (v, (s0 * r_wire - s1 * r_wire + s1 * obs.r + i * kr0 * src.r).exp())
        } else {
            let v = divide(specfun::hankel1_pair_scaled(ni, kr0 * obs.r)?, norms.h_out);
            (v, (s0 * r_wire + i * kr0 * (obs.r + src.r - r_wire)).exp())
        };
        let factor = factor * (norms.j_out * norms.h_out);
        if !(factor.re.is_finite() && factor.im.is_finite()) || norms.j_out == 0.0 {
            return Err(Error::Range(format!("order {n} out of floating-point range at k_z = {kz}")));
        }
        let prefactor = i / (8.0 * std::f64::consts::PI) * if n == 0 { 1.0 } else { 2.0 } / (kr0 * kr0);
        Ok(Self { surface, coeffs, obs_vals, src_vals, inside, factor: factor * prefactor })
    }

    /// Summand at `sign`·k_z.
    fn kernel(&self, sign: f64, obs: CylPoint, src: CylPoint) -> CMatrix3 {
        let (mut obs_mode, coeffs) = if self.inside {
            (self.surface.inside, self.coeffs)
        } else {
            (self.surface.outside, self.coeffs)
        };
        let mut src_mode = self.surface.outside.reversed();
        let coeffs = if sign < 0.0 {
            obs_mode = obs_mode.reversed();
            src_mode = src_mode.reversed();
            coeffs.cross_flipped()
        } else {
            coeffs
        };
        let mut g = CMatrix3::zeros();
        for parity in [Parity::Even, Parity::Odd] {
            let c = coeffs.for_parity(parity);
            let (a, b, cc, d) = if self.inside { (c.a_t, c.b_t, c.c_t, c.d_t) } else { (c.a_r, c.b_r, c.c_r, c.d_r) };
            let m_obs = cart(&m_pattern(parity, &obs_mode, obs.r, self.obs_vals), &obs_mode, obs);
            let n_obs = cart(&n_pattern(parity, &obs_mode, obs.r, self.obs_vals), &obs_mode, obs);
            let m_bar = cart(&m_pattern(parity.flip(), &obs_mode, obs.r, self.obs_vals), &obs_mode, obs);
            let n_bar = cart(&n_pattern(parity.flip(), &obs_mode, obs.r, self.obs_vals), &obs_mode, obs);
            let m_src = cart(&m_pattern(parity, &src_mode, src.r, self.src_vals), &src_mode, src);
            let n_src = cart(&n_pattern(parity, &src_mode, src.r, self.src_vals), &src_mode, src);
            g += outer(&axpy(a, &m_obs, b, &n_bar), &m_src);
            g += outer(&axpy(cc, &n_obs, d, &m_bar), &n_src);
        }
        g * self.factor
    }
}

/// The order-n summand of the reflected (obs outside) or transmitted (obs
/// inside) Green tensor at a single k_z, including (i/8π)(2 − δ_n0)/k_r0².
pub fn green_integrand(sys: &WireSystem, n: u32, kz: f64, k0: f64, obs: CylPoint, src: CylPoint) -> Result<CMatrix3> {
    Ok(KernelSetup::new(sys, n, kz, k0, obs, src)?.kernel(1.0, obs, src))
}

/// Summand at +k_z plus summand at −k_z, for k_z ≥ 0.
pub fn green_integrand_folded(sys: &WireSystem, n: u32, kz: f64, k0: f64, obs: CylPoint, src: CylPoint) -> Result<CMatrix3> {
    let setup = KernelSetup::new(sys, n, kz, k0, obs, src)?;
    Ok(setup.kernel(1.0, obs, src) + setup.kernel(-1.0, obs, src))
}

// Imaginary parts first: the quadrature error test only looks at them.
fn flatten(m: &CMatrix3) -> [f64; 18] {
    let mut out = [0.0; 18];
    for (k, v) in m.iter().enumerate() {
        out[k] = v.im;
        out[9 + k] = v.re;
    }
    out
}

fn unflatten(v: &[f64; 18]) -> CMatrix3 {
    let mut m = CMatrix3::zeros();
    for (k, e) in m.iter_mut().enumerate() {
        *e = Complex64::new(v[9 + k], v[k]);
    }
    m
}

fn im_norm(m: &CMatrix3) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.im.abs()))
}

#[cfg(test)]
fn matrix_norm(m: &CMatrix3) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.norm()))
}

/// Relative half width of the band around |k_z| = k₀ in which samples are
/// moved to its edge. The summands there are sums of terms growing like
/// 1/(k₀ − |k_z|) that cancel, and lose all precision on the light line.
const LIGHT_LINE_BAND: f64 = 1e-6;

fn off_light_line(kz: f64, k0: f64) -> f64 {
    let d = kz / k0 - 1.0;
    if d.abs() < LIGHT_LINE_BAND {
        k0 * (1.0 + LIGHT_LINE_BAND.copysign(d))
    } else {
        kz
    }
}

/// Folded summand at `kz`. For high orders the radial functions leave the
/// double range in a band around the light line where the summand is flat;
/// a failing sample there is replaced by the nearest representable one on the
/// same side, moving out at most 5% of k₀.
fn folded_sample(sys: &WireSystem, n: u32, kz: f64, k0: f64, obs: CylPoint, src: CylPoint) -> Result<CMatrix3> {
    let kz = off_light_line(kz, k0);
    match green_integrand_folded(sys, n, kz, k0, obs, src) {
        Err(Error::Range(msg)) if n > 0 && (kz / k0 - 1.0).abs() < 0.05 => {
            let side = (kz / k0 - 1.0).signum();
            for band in [1e-4, 1e-3, 1e-2, 0.05] {
                let moved = k0 * (1.0 + side * band);
                if (moved - k0).abs() <= (kz - k0).abs() {
                    continue;
                }
                if let Ok(g) = green_integrand_folded(sys, n, moved, k0, obs, src) {
                    return Ok(g);
                }
            }
            Err(Error::Range(msg))
        }
        other => other,
    }
}

type BreakpointKey = (u64, u64, u64, u64, u32, u64);

static BREAKPOINTS: Mutex<Option<HashMap<BreakpointKey, Vec<f64>>>> = Mutex::new(None);

fn cached_breakpoints(sys: &WireSystem, n: u32, k0: f64, kz_max: f64) -> Result<Vec<f64>> {
    let key = (sys.radius.to_bits(), sys.eps.re.to_bits(), sys.eps.im.to_bits(), k0.to_bits(), n, kz_max.to_bits());
    if let Some(v) = BREAKPOINTS.lock().expect("breakpoint cache").get_or_insert_with(HashMap::new).get(&key) {
        return Ok(v.clone());
    }
    let pts = peak_breakpoints(sys, n, k0, kz_max)?;
    BREAKPOINTS
        .lock()
        .expect("breakpoint cache")
        .get_or_insert_with(HashMap::new)
        .insert(key, pts.clone());
    Ok(pts)
}

/// Main evanescent cutoff before the adaptive tail: 40 k₀, or further out
/// when a guided root sits near it.
fn main_cutoff(breaks: &[f64], k0: f64) -> f64 {
    let last = breaks.last().copied().unwrap_or(0.0);
    (40.0 * k0).max(1.5 * last)
}

fn im_part(v: &[f64; 18]) -> [f64; 9] {
    let mut out = [0.0; 9];
    out.copy_from_slice(&v[..9]);
    out
}

struct OrderResult {
    traveling: CMatrix3,
    evanescent: CMatrix3,
    err_traveling: f64,
    err_evanescent: f64,
}

fn integrate_order(
    sys: &WireSystem,
    n: u32,
    k0: f64,
    obs: CylPoint,
    src: CylPoint,
    q: &QuadratureSpec,
    region: KzRegion,
    scale_hint: f64,
) -> Result<OrderResult> {
    let f = |kz: f64| -> Result<[f64; 18]> {
        Ok(flatten(&folded_sample(sys, n, kz, k0, obs, src)?))
    };
    let opts = QuadOptions {
        rel_tol: q.rel_tol,
        abs_tol: q.abs_tol.max(0.1 * q.rel_tol * scale_hint),
        max_intervals: 4000,
        control: 9,
    };
    let mut out = OrderResult {
        traveling: CMatrix3::zeros(),
        evanescent: CMatrix3::zeros(),
        err_traveling: 0.0,
        err_evanescent: 0.0,
    };
    if region != KzRegion::Evanescent {
        let r = integrate(f, &[0.0, k0], opts)?;
        if !r.converged {
            return Err(Error::Convergence(format!("traveling k_z integral for n = {n} did not converge (error {:.3e})", r.error)));
        }
        out.traveling = unflatten(&r.value);
        out.err_traveling = r.error;
    }
    if region == KzRegion::Traveling {
        return Ok(out);
    }
    let probe = q.cutoff.unwrap_or(100.0 * k0);
    let breaks = if q.peak_refinement { cached_breakpoints(sys, n, k0, probe)? } else { Vec::new() };
    let upper = q.cutoff.unwrap_or_else(|| main_cutoff(&breaks, k0));
    let mut pts = vec![k0];
    pts.extend(breaks.iter().copied().filter(|&x| x < upper));
    pts.push(upper);
    let r = integrate(f, &pts, opts)?;
    if !r.converged {
        return Err(Error::Convergence(format!("evanescent k_z integral for n = {n} did not converge (error {:.3e})", r.error)));
    }
    let mut total = r.value;
    let mut err = r.error;
    if q.cutoff.is_none() {
        // doubling panels until two in a row are negligible and shrinking
        let mut lo = upper;
        let mut small = 0;
        let mut prev = f64::INFINITY;
        let limit = 0.5 * specfun::MAX_ABS_ARG / obs.r.max(src.r).max(sys.radius * sys.eps.norm().sqrt());
        loop {
            let hi = 2.0 * lo;
            if hi > limit {
                return Err(Error::Convergence(format!(
                    "evanescent tail for n = {n} not negligible at k_z = {lo:.3e} (points too close to the wire?)"
                )));
            }
            let p = integrate(f, &[lo, hi], opts)?;
            if !p.converged {
                return Err(Error::Convergence(format!("tail panel [{lo:.3e}, {hi:.3e}] for n = {n} did not converge")));
            }
            for k in 0..18 {
                total[k] += p.value[k];
            }
            err += p.error;
            let size = max_norm(&im_part(&p.value));
            let target = opts.abs_tol.max(0.1 * q.rel_tol * max_norm(&im_part(&total)));
            if size <= target && size <= prev {
                small += 1;
                // two quiet panels, or one in the exponentially decaying regime
                if small == 2 || size <= 1e-3 * prev {
                    break;
                }
            } else {
                small = 0;
            }
            prev = size;
            lo = hi;
        }
    }
    out.evanescent = unflatten(&total);
    out.err_evanescent = err;
    Ok(out)
}

/// Reflected Green tensor over the requested k_z region, split at k₀.
pub fn green_reflected_split(
    sys: &WireSystem,
    obs: CylPoint,
    src: CylPoint,
    k0: f64,
    q: &QuadratureSpec,
    region: KzRegion,
) -> Result<GreenSplit> {
    q.validate(k0)?;
    if !(obs.r > sys.radius && src.r > sys.radius) {
        return Err(Error::Precondition(format!(
            "reflected tensor needs both points outside the wire (r = {}, r' = {}, R = {})",
            obs.r, src.r, sys.radius
        )));
    }
    if sys.is_lossless() && region != KzRegion::Traveling {
        return Err(Error::Precondition(
            "lossless wire has guided-mode poles on the evanescent k_z axis; only the traveling region is integrable".into(),
        ));
    }
    let mut trav = CMatrix3::zeros();
    let mut evan = CMatrix3::zeros();
    let mut err_t = 0.0;
    let mut err_e = 0.0;
    let mut quiet = 0;
    let mut history: Vec<f64> = Vec::new();
    let mut n = 0;
    while n <= q.n_max {
        // a batch of orders shares the scale hint, so results do not depend on the thread count;
        // n = 0 runs alone so that the higher orders are resolved against its scale, not their own
        let scale = im_norm(&(trav + evan));
        let last = if n == 0 { 0 } else { q.n_max.min(n + ORDER_BATCH - 1) };
        let batch: Vec<u32> = (n..=last).collect();
        let results: Vec<Result<OrderResult>> = batch
            .par_iter()
            .map(|&m| integrate_order(sys, m, k0, obs, src, q, region, scale))
            .collect();
        for (&m, o) in batch.iter().zip(results) {
            let o = o?;
            trav += o.traveling;
            evan += o.evanescent;
            err_t += o.err_traveling;
            err_e += o.err_evanescent;
            let contribution = im_norm(&(o.traveling + o.evanescent));
            let total = im_norm(&(trav + evan));
            history.push(contribution);
            let mk = |t: CMatrix3, e: CMatrix3, et: f64, ee: f64| GreenSplit {
                traveling: GreenSample { matrix: t, obs, src, k0, error: et, orders: m + 1 },
                evanescent: GreenSample { matrix: e, obs, src, k0, error: ee, orders: m + 1 },
            };
            if m > 0 && contribution <= q.rel_tol * total + q.abs_tol {
                quiet += 1;
                if quiet == 2 {
                    return Ok(mk(trav, evan, err_t, err_e));
                }
            } else {
                quiet = 0;
            }
            // geometric decay of the orders: close the sum with its tail estimate
            if let Some(ratio) = geometric_ratio(&history) {
                let w = ratio / (1.0 - ratio);
                let tail = contribution * w;
                let enough = if m == q.n_max { 1e-3 * total } else { q.rel_tol * total + q.abs_tol };
                if tail <= enough {
                    let t = trav + o.traveling * Complex64::from(w);
                    let e = evan + o.evanescent * Complex64::from(w);
                    let share = |x: &CMatrix3| im_norm(x) / (im_norm(&o.traveling) + im_norm(&o.evanescent)).max(f64::MIN_POSITIVE);
                    return Ok(mk(t, e, err_t + tail * share(&o.traveling), err_e + tail * share(&o.evanescent)));
                }
            }
        }
        n = last + 1;
    }
    Err(Error::Convergence(format!(
        "harmonic sum not converged at n_max = {} (last order contributes {:.3e} of {:.3e}); r = {}, r' = {}, R = {}",
        q.n_max,
        history.last().copied().unwrap_or(0.0),
        im_norm(&(trav + evan)),
        obs.r,
        src.r,
        sys.radius
    )))
}

const ORDER_BATCH: u32 = 4;

/// Common ratio of the last contributions when they decay geometrically
/// (three consecutive ratios within 5% of each other and below 0.95).
fn geometric_ratio(history: &[f64]) -> Option<f64> {
    let k = history.len();
    if k < 8 {
        return None;
    }
    let r: Vec<f64> = (k - 3..k).map(|i| history[i] / history[i - 1]).collect();
    let mean = (r[0] + r[1] + r[2]) / 3.0;
    if !(mean > 0.0 && mean < 0.95) {
        return None;
    }
    if r.iter().all(|x| (x / mean - 1.0).abs() < 0.05) {
        Some(r[2])
    } else {
        None
    }
}

/// Reflected Green tensor G_R(obs, src) for a lossy wire.
pub fn green_reflected(sys: &WireSystem, obs: CylPoint, src: CylPoint, k0: f64, q: &QuadratureSpec) -> Result<GreenSample> {
    Ok(green_reflected_split(sys, obs, src, k0, q, KzRegion::All)?.total())
}

/// Contribution of the single harmonic order `n` to the reflected tensor,
/// split at k₀.
pub fn green_reflected_order(
    sys: &WireSystem,
    n: u32,
    obs: CylPoint,
    src: CylPoint,
    k0: f64,
    q: &QuadratureSpec,
    region: KzRegion,
) -> Result<GreenSplit> {
    q.validate(k0)?;
    if !(obs.r > sys.radius && src.r > sys.radius) {
        return Err(Error::Precondition(format!(
            "reflected tensor needs both points outside the wire (r = {}, r' = {}, R = {})",
            obs.r, src.r, sys.radius
        )));
    }
    if sys.is_lossless() && region != KzRegion::Traveling {
        return Err(Error::Precondition(
            "lossless wire has guided-mode poles on the evanescent k_z axis; only the traveling region is integrable".into(),
        ));
    }
    let o = integrate_order(sys, n, k0, obs, src, q, region, 0.0)?;
    Ok(GreenSplit {
        traveling: GreenSample { matrix: o.traveling, obs, src, k0, error: o.err_traveling, orders: 1 },
        evanescent: GreenSample { matrix: o.evanescent, obs, src, k0, error: o.err_evanescent, orders: 1 },
    })
}

fn spherical_j0_j2(x: f64) -> (f64, f64) {
    if x < 0.1 {
        let x2 = x * x;
        let j0 = 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)));
        let j2 = x2 / 15.0 * (1.0 - x2 / 14.0 * (1.0 - x2 / 36.0 * (1.0 - x2 / 66.0)));
        (j0, j2)
    } else {
        let (s, c) = x.sin_cos();
        let j0 = s / x;
        let j1 = s / (x * x) - c / x;
        (j0, 3.0 * j1 / x - j0)
    }
}

/// Im G₀(obs, src) of the free-space dyadic. With x = k|r − r'| and R̂ the unit
/// separation: Im G₀ = (k/4π)[(2j₀(x) − j₂(x))/3 · I + j₂(x) R̂R̂], which is
/// (k/6π)·I at coincidence.
pub fn green_direct_im(obs: CylPoint, src: CylPoint, k0: f64) -> Matrix3<f64> {
    let a = obs.to_cartesian();
    let b = src.to_cartesian();
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    let dist = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    let x = k0 * dist;
    let (j0, j2) = spherical_j0_j2(x);
    let pre = k0 / (4.0 * std::f64::consts::PI);
    let diag = pre * (2.0 * j0 - j2) / 3.0;
    let mut m = Matrix3::identity() * diag;
    if dist > 0.0 {
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] += pre * j2 * d[i] * d[j] / (dist * dist);
            }
        }
    }
    m
}

/// Full free-space dyadic G₀ at separated points (real and imaginary parts).
pub fn green_direct(obs: CylPoint, src: CylPoint, k0: f64) -> Result<CMatrix3> {
    let a = obs.to_cartesian();
    let b = src.to_cartesian();
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    let dist = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    if dist == 0.0 {
        return Err(Error::Domain("real part of the free-space tensor diverges at coincidence".into()));
    }
    let i = Complex64::i();
    let x = k0 * dist;
    let phase = (i * x).exp() / (4.0 * std::f64::consts::PI * dist);
    let p = 1.0 + i / x - 1.0 / (x * x);
    let q = -1.0 - 3.0 * i / x + 3.0 / (x * x);
    Ok(CMatrix3::from_fn(|r, c| {
        let delta = if r == c { 1.0 } else { 0.0 };
        phase * (p * delta + q * d[r] * d[c] / (dist * dist))
    }))
}

/// Order-n, single-k_z summand of the cylindrical expansion of G₀ for
/// obs.r ≥ src.r: (i/8π)(2 − δ_n0)/k_r0² Σ_p [M_p⁽¹⁾(k_z, r) ⊗ M_p(−k_z, r') + N_p⁽¹⁾ ⊗ N_p].
pub fn direct_expansion_integrand(n: u32, kz: f64, k0: f64, obs: CylPoint, src: CylPoint) -> Result<CMatrix3> {
    if obs.r < src.r {
        return Err(Error::Precondition("expansion written for r >= r'".into()));
    }
    let mp = ModeParams::new(n, Complex64::new(kz, 0.0), Complex64::new(k0, 0.0));
    let back = mp.reversed();
    let ni = n as i32;
    let h = specfun::hankel1_pair(ni, mp.kr * obs.r)?;
    let j = specfun::bessel_j_pair(ni, mp.kr * src.r)?;
    let mut g = CMatrix3::zeros();
    for parity in [Parity::Even, Parity::Odd] {
        let m1 = cart(&m_pattern(parity, &mp, obs.r, h), &mp, obs);
        let n1 = cart(&n_pattern(parity, &mp, obs.r, h), &mp, obs);
        let m0 = cart(&m_pattern(parity, &back, src.r, j), &back, src);
        let n0 = cart(&n_pattern(parity, &back, src.r, j), &back, src);
        g += outer(&m1, &m0) + outer(&n1, &n0);
    }
    let pre = Complex64::i() / (8.0 * std::f64::consts::PI) * if n == 0 { 1.0 } else { 2.0 } / (mp.kr * mp.kr);
    Ok(g * pre)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::K0_REF;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn lossy() -> WireSystem {
        WireSystem::new(0.01, c(-75.0, 0.6)).unwrap()
    }

    #[test]
    fn direct_im_coincident_and_continuity() {
        let p = CylPoint::new(0.3, 0.2, 0.1);
        let g = green_direct_im(p, p, K0_REF);
        let want = K0_REF / (6.0 * std::f64::consts::PI);
        assert!((g - Matrix3::identity() * want).abs().max() < 1e-15);
        let near = CylPoint::new(0.3, 0.2, 0.1 + 1e-7);
        assert!((green_direct_im(p, near, K0_REF) - g).abs().max() < 1e-12);
        // series and closed form agree at the switch-over
        let a = green_direct_im(p, CylPoint::new(0.3, 0.2, 0.1 + 0.0999999 / K0_REF), K0_REF);
        let b = green_direct_im(p, CylPoint::new(0.3, 0.2, 0.1 + 0.1000001 / K0_REF), K0_REF);
        assert!((a - b).abs().max() < 1e-8);
    }

    #[test]
    fn direct_im_matches_full_dyadic() {
        let p = CylPoint::new(0.3, 0.2, 0.1);
        let q = CylPoint::new(0.1, 1.0, 0.5);
        let full = green_direct(p, q, K0_REF).unwrap();
        let im = green_direct_im(p, q, K0_REF);
        assert!((full.map(|v| v.im) - im).abs().max() < 1e-13);
    }

    #[test]
    fn folding_matches_explicit_negative_kz() {
        let sys = lossy();
        let obs = CylPoint::new(0.015, 0.4, 0.2);
        let src = CylPoint::new(0.02, -0.3, -0.1);
        for n in [0, 2] {
            for kz in [0.4 * K0_REF, 3.0 * K0_REF] {
                let folded = green_integrand_folded(&sys, n, kz, K0_REF, obs, src).unwrap();
                let explicit = green_integrand(&sys, n, kz, K0_REF, obs, src).unwrap()
                    + explicit_negative(&sys, n, kz, obs, src);
                let scale = matrix_norm(&folded);
                assert!(matrix_norm(&(folded - explicit)) < 1e-12 * scale, "n={n} kz={kz}");
            }
        }
    }

    // -k_z summand from an independent boundary solve at -k_z
    fn explicit_negative(sys: &WireSystem, n: u32, kz: f64, obs: CylPoint, src: CylPoint) -> CMatrix3 {
        let mut setup = KernelSetup::new(sys, n, kz, K0_REF, obs, src).unwrap();
        let (s, _) = normalized_surface(Surface::new(sys, n, c(-kz, 0.0), K0_REF).unwrap());
        setup.coeffs = solve_surface(&s).unwrap();
        setup.surface = s;
        setup.kernel(1.0, obs, src)
    }

    #[test]
    fn integrand_has_plasmon_peak() {
        let sys = lossy();
        let p = CylPoint::new(0.015, 0.0, 0.0);
        let root = crate::dispersion::fundamental_root(&sys, K0_REF).unwrap();
        let at = green_integrand(&sys, 0, root.kz, K0_REF, p, p).unwrap()[(0, 0)].im;
        let off = green_integrand(&sys, 0, 1.5 * root.kz, K0_REF, p, p).unwrap()[(0, 0)].im;
        assert!(at > 100.0 * off.abs());
    }

    #[test]
    fn transmitted_kernel_is_finite() {
        let sys = lossy();
        let g = green_integrand(&sys, 1, 2.0 * K0_REF, K0_REF, CylPoint::new(0.005, 0.1, 0.0), CylPoint::new(0.015, 0.0, 0.0)).unwrap();
        assert!(g.iter().all(|v| v.re.is_finite() && v.im.is_finite()));
    }

    #[test]
    fn direct_expansion_reproduces_closed_form() {
        // the evanescent part of the expansion is real, so Im G0 comes from |k_z| <= k0
        let obs = CylPoint::new(0.2, 0.0, 0.3);
        let src = CylPoint::new(0.2, 0.0, 0.0);
        let mut sum = CMatrix3::zeros();
        for n in 0..12 {
            let f = |kz: f64| -> Result<[f64; 18]> {
                Ok(flatten(&(direct_expansion_integrand(n, kz, K0_REF, obs, src)? + direct_expansion_integrand(n, -kz, K0_REF, obs, src)?)))
            };
            let r = integrate(f, &[0.0, K0_REF], QuadOptions { rel_tol: 1e-10, abs_tol: 1e-14, max_intervals: 2000, control: 9 }).unwrap();
            sum += unflatten(&r.value);
        }
        let want = green_direct_im(obs, src, K0_REF);
        assert!((sum.map(|v| v.im) - want).abs().max() < 1e-6 * want.abs().max(), "{sum} vs {want}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let sys = lossy();
        let inside = CylPoint::new(0.005, 0.0, 0.0);
        let out = CylPoint::new(0.02, 0.0, 0.0);
        let q = QuadratureSpec::default();
        assert!(matches!(green_reflected(&sys, inside, out, K0_REF, &q), Err(Error::Precondition(_))));
        let lossless = sys.lossless();
        assert!(matches!(green_reflected(&lossless, out, out, K0_REF, &q), Err(Error::Precondition(_))));
        assert!(green_reflected_split(&lossless, out, out, K0_REF, &q, KzRegion::Traveling).is_ok());
        let bad = QuadratureSpec { cutoff: Some(0.5 * K0_REF), ..q };
        assert!(green_reflected(&sys, out, out, K0_REF, &bad).is_err());
    }

    #[test]
    fn vacuum_wire_reflects_nothing() {
        let sys = WireSystem::new(0.01, c(1.0, 1e-9)).unwrap();
        let p = CylPoint::new(0.02, 0.0, 0.0);
        let g = green_reflected(&sys, p, p, K0_REF, &QuadratureSpec { peak_refinement: false, ..Default::default() }).unwrap();
        assert!(matrix_norm(&g.matrix) < 1e-6 * K0_REF / (6.0 * std::f64::consts::PI));
    }
}
