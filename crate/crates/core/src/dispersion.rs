//! Guided plasmon modes of the wire.
//!
//! For a lossless wire and k_z > k₀ both radial wavenumbers are imaginary,
//! k_r0 = iκ₀ and k_r1 = iκ₁, and the mode equation
//!
//! ```text
//! n² k_z² / R² (1/k_r1² − 1/k_r0²)²
//!   = (J'/(k_r1 J) − H'/(k_r0 H)) · (k₁² J'/(k_r1 J) − k₀² H'/(k_r0 H))
//! ```
//!
//! is real on the real k_z axis. Its sign changes bracket the guided roots.
//! With losses the roots move off the axis and show up as Lorentzian peaks in
//! the n = 0 Green-tensor kernel; [`resonance_profile`] samples that kernel
//! and [`resonance_hwhm`] measures the peak.

use num_complex::Complex64;

use crate::cylwave::CylPoint;
use crate::greentensor::green_integrand;
use crate::optimize::brent_root;
use crate::scatter::{radial_wavenumbers, WireSystem};
use crate::specfun;
use crate::{Error, Result};

/// Upper end of the default root search, in units of k₀.
pub const DEFAULT_SEARCH_MAX: f64 = 100.0;

const SCAN_POINTS: usize = 800;

/// A guided mode of a lossless wire.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeRoot {
    pub n: u32,
    /// Longitudinal wavenumber (same units as k₀).
    pub kz: f64,
    pub radius: f64,
    /// |LHS − RHS| at `kz`, relative to the magnitude of the individual terms.
    pub residual: f64,
}

struct Sides {
    lhs: f64,
    rhs: f64,
    /// Magnitude of the individual terms, for relative residuals.
    scale: f64,
}

fn mode_sides(sys: &WireSystem, n: u32, kz: f64, k0: f64) -> Result<Sides> {
    if !sys.is_lossless() || sys.eps.re >= 0.0 {
        return Err(Error::Precondition("mode equation needs a lossless metal (real ε < 0)".into()));
    }
    if !(kz > k0) {
        return Err(Error::Precondition(format!("mode equation is evaluated for k_z > k0, got {kz}")));
    }
    let kzc = Complex64::new(kz, 0.0);
    let (kr0, kr1) = radial_wavenumbers(sys, kzc, k0);
    let r = sys.radius;
    let ni = n as i32;
    let j = specfun::bessel_j_pair_scaled(ni, kr1 * r)?;
    let h = specfun::hankel1_pair_scaled(ni, kr0 * r)?;
    let pj = j.deriv / (j.value * kr1);
    let ph = h.deriv / (h.value * kr0);
    let k1sq = sys.eps * k0 * k0;
    let nn = n as f64;
    let lhs_c = (kzc * nn / r).powu(2) * (kr1.powi(-2) - kr0.powi(-2)).powu(2);
    let rhs_c = (pj - ph) * (k1sq * pj - ph * k0 * k0);
    let scale = lhs_c.norm() + rhs_c.norm();
    if lhs_c.im.abs() + rhs_c.im.abs() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Domain(format!("mode equation is not real at k_z = {kz}")));
    }
    let terms = lhs_c.norm() + (pj.norm() + ph.norm()) * ((k1sq * pj).norm() + (ph * k0 * k0).norm());
    Ok(Sides { lhs: lhs_c.re, rhs: rhs_c.re, scale: terms })
}

/// Left-minus-right side of the mode equation for a lossless wire, k_z > k₀.
pub fn mode_equation_residual(sys: &WireSystem, n: u32, kz: f64, k0: f64) -> Result<f64> {
    let s = mode_sides(sys, n, kz, k0)?;
    Ok(s.lhs - s.rhs)
}

/// All sign-change-bracketed roots of order `n` with k_z/k₀ in `(1, search_max]`,
/// refined to 1e-12 relative. Empty when the mode is cut off.
pub fn mode_roots(sys: &WireSystem, n: u32, k0: f64, search_max: f64) -> Result<Vec<ModeRoot>> {
    let lo = 1e-9f64;
    let hi = search_max - 1.0;
    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| k0 * (1.0 + lo * (hi / lo).powf(i as f64 / (SCAN_POINTS - 1) as f64)))
        .collect();
    let f = |kz: f64| mode_equation_residual(sys, n, kz, k0);
    let mut values = Vec::with_capacity(grid.len());
    for &kz in &grid {
        // high orders overflow right at the light line; such samples are skipped
        match f(kz) {
            Ok(v) => values.push(v),
            Err(Error::Range(_)) => values.push(f64::NAN),
            Err(e) => return Err(e),
        }
    }
    let mut roots: Vec<ModeRoot> = Vec::new();
    for i in 1..grid.len() {
        if !(values[i - 1].is_finite() && values[i].is_finite()) {
            continue;
        }
        if values[i - 1] == 0.0 || values[i - 1].signum() == values[i].signum() {
            continue;
        }
        let kz = brent_root(f, grid[i - 1], grid[i], 1e-13 * grid[i])?;
        let s = mode_sides(sys, n, kz, k0)?;
        let residual = (s.lhs - s.rhs).abs() / s.scale.max(f64::MIN_POSITIVE);
        if roots.last().map_or(true, |r| kz - r.kz > 1e-9 * k0) {
            roots.push(ModeRoot { n, kz, radius: sys.radius, residual });
        }
    }
    Ok(roots)
}

/// The fundamental (n = 0) plasmon root of the lossless counterpart of `sys`.
pub fn fundamental_root(sys: &WireSystem, k0: f64) -> Result<ModeRoot> {
    let lossless = sys.lossless();
    mode_roots(&lossless, 0, k0, DEFAULT_SEARCH_MAX)?
        .into_iter()
        .last()
        .ok_or_else(|| Error::Convergence(format!("no n = 0 root below {DEFAULT_SEARCH_MAX} k0 at R = {}", sys.radius)))
}

/// Planar surface-plasmon wavenumber k₀ √(ε/(ε+1)) for real ε < −1.
pub fn planar_spp(eps: f64, k0: f64) -> f64 {
    k0 * (eps / (eps + 1.0)).sqrt()
}

/// First-order estimate of the lossy resonance half width: ε″ |dk_z/dε′| at
/// the lossless root nearest `kz`.
pub fn width_estimate(sys: &WireSystem, n: u32, kz: f64, k0: f64) -> Result<f64> {
    let base = sys.lossless();
    let h = 1e-4 * base.eps.re.abs();
    let nearest = |eps_re: f64| -> Result<f64> {
        let s = base.with_eps(Complex64::new(eps_re, 0.0))?;
        let lo = k0 + 0.5 * (kz - k0);
        let hi = kz + 0.5 * (kz - k0) + 1e-3 * kz;
        let f = |x: f64| mode_equation_residual(&s, n, x, k0);
        brent_root(f, lo, hi, 1e-14 * kz)
    };
    let dk = (nearest(base.eps.re + h)? - nearest(base.eps.re - h)?) / (2.0 * h);
    Ok(sys.eps.im * dk.abs())
}

/// Breakpoints around every guided root of order `n` for the k_z quadrature:
/// the root ± {1, 3, 10, 30} estimated half widths, clipped to `(k0, kz_max)`.
pub fn peak_breakpoints(sys: &WireSystem, n: u32, k0: f64, kz_max: f64) -> Result<Vec<f64>> {
    let roots = mode_roots(&sys.lossless(), n, k0, (kz_max / k0).min(DEFAULT_SEARCH_MAX))?;
    let mut pts = Vec::new();
    for root in roots {
        let w = width_estimate(sys, n, root.kz, k0)?.max(1e-9 * root.kz);
        pts.push(root.kz);
        for m in [1.0, 3.0, 10.0, 30.0] {
            pts.push(root.kz - m * w);
            pts.push(root.kz + m * w);
        }
    }
    pts.retain(|&x| x > k0 && x < kz_max);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    Ok(pts)
}

/// One sample of the n = 0 spectral kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub kz: f64,
    pub value: f64,
}

/// Im[r̂ᵀ G⁽ⁿ⁼⁰⁾(r_A, r_A; k_z) r̂] on `grid`, with the probe at distance `r_a`
/// from the axis.
pub fn resonance_profile(sys: &WireSystem, r_a: f64, k0: f64, grid: &[f64]) -> Result<Vec<ProfilePoint>> {
    if sys.is_lossless() {
        return Err(Error::Precondition("resonance profile needs ε″ > 0".into()));
    }
    let p = CylPoint::new(r_a, 0.0, 0.0);
    grid.iter()
        .map(|&kz| {
            let g = green_integrand(sys, 0, kz, k0, p, p)?;
            Ok(ProfilePoint { kz, value: g[(0, 0)].im })
        })
        .collect()
}

/// Grid concentrated on the n = 0 resonance: `count` points over the lossless
/// root ± `span` first-order half widths.
pub fn resonance_grid(sys: &WireSystem, k0: f64, span: f64, count: usize) -> Result<Vec<f64>> {
    let root = fundamental_root(sys, k0)?;
    let w = width_estimate(sys, 0, root.kz, k0)?;
    let lo = (root.kz - span * w).max(k0 * (1.0 + 1e-9));
    let hi = root.kz + span * w;
    Ok((0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect())
}

/// Profile on an automatically placed grid: a first pass on the first-order
/// prediction, then a second pass centered on the observed peak.
pub fn resonance_profile_auto(sys: &WireSystem, r_a: f64, k0: f64) -> Result<Vec<ProfilePoint>> {
    let first = resonance_profile(sys, r_a, k0, &resonance_grid(sys, k0, 30.0, 241)?)?;
    // the first pass only locates the peak
    let fit = measure_peak(&first, 3)?;
    let lo = (fit.k_peak - 12.0 * fit.hwhm).max(k0 * (1.0 + 1e-9));
    let hi = fit.k_peak + 12.0 * fit.hwhm;
    let grid: Vec<f64> = (0..481).map(|i| lo + (hi - lo) * i as f64 / 480.0).collect();
    resonance_profile(sys, r_a, k0, &grid)
}

/// Peak position and width of a sampled resonance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceFit {
    pub k_peak: f64,
    pub peak_value: f64,
    /// Half width at half maximum from interpolated half-max crossings.
    pub hwhm: f64,
    /// Width of the least-squares Lorentzian.
    pub lorentzian_hwhm: f64,
    /// RMS of (data − Lorentzian) / peak over ±3 hwhm.
    pub lorentzian_rms: f64,
}

fn crossing(x0: f64, y0: f64, x1: f64, y1: f64, level: f64) -> f64 {
    x0 + (level - y0) * (x1 - x0) / (y1 - y0)
}

/// Measure the highest peak of `profile` (sorted by k_z).
pub fn resonance_hwhm(profile: &[ProfilePoint]) -> Result<ResonanceFit> {
    measure_peak(profile, 20)
}

fn measure_peak(profile: &[ProfilePoint], min_above: usize) -> Result<ResonanceFit> {
    let imax = profile
        .iter()
        .enumerate()
        .fold(0, |b, (i, p)| if p.value > profile[b].value { i } else { b });
    let ymax = profile[imax].value;
    if !(ymax > 0.0) || imax == 0 || imax + 1 == profile.len() {
        return Err(Error::Resolution("no interior positive peak in the profile".into()));
    }
    let half = 0.5 * ymax;
    let mut left = None;
    for i in (0..imax).rev() {
        if profile[i].value < half {
            left = Some(crossing(profile[i].kz, profile[i].value, profile[i + 1].kz, profile[i + 1].value, half));
            break;
        }
    }
    let mut right = None;
    for i in imax + 1..profile.len() {
        if profile[i].value < half {
            right = Some(crossing(profile[i - 1].kz, profile[i - 1].value, profile[i].kz, profile[i].value, half));
            break;
        }
    }
    let (Some(left), Some(right)) = (left, right) else {
        return Err(Error::Resolution("half maximum not reached on both sides of the peak".into()));
    };
    let above = profile.iter().filter(|p| p.value >= half).count();
    if above < min_above {
        return Err(Error::Resolution(format!("only {above} samples above half maximum (need {min_above})")));
    }
    // parabolic refinement of the peak
    let (a, b, c) = (profile[imax - 1], profile[imax], profile[imax + 1]);
    let denom = (a.value - 2.0 * b.value + c.value) * (c.kz - b.kz);
    let k_peak = if denom != 0.0 { b.kz - 0.5 * (c.value - a.value) * (c.kz - b.kz) / (a.value - 2.0 * b.value + c.value) } else { b.kz };
    let hwhm = 0.5 * (right - left);
    let lor = lorentzian_fit(profile, k_peak, hwhm)?;
    Ok(ResonanceFit { k_peak, peak_value: ymax, hwhm, lorentzian_hwhm: lor.0, lorentzian_rms: lor.1 })
}

/// Fit 1/y = α + βk + γk² over ±3 hwhm and report (width, relative RMS misfit).
fn lorentzian_fit(profile: &[ProfilePoint], center: f64, hwhm: f64) -> Result<(f64, f64)> {
    let window: Vec<&ProfilePoint> = profile
        .iter()
        .filter(|p| (p.kz - center).abs() <= 3.0 * hwhm && p.value > 0.0)
        .collect();
    if window.len() < 5 {
        return Err(Error::Resolution("too few samples for the Lorentzian fit".into()));
    }
    // centered, scaled abscissa keeps the normal equations well conditioned
    let mut ata = nalgebra::Matrix3::<f64>::zeros();
    let mut atb = nalgebra::Vector3::<f64>::zeros();
    for p in &window {
        let t = (p.kz - center) / hwhm;
        let row = nalgebra::Vector3::new(1.0, t, t * t);
        // weight by y² so the fit is least squares in y rather than in 1/y
        let w = p.value * p.value;
        ata += row * row.transpose() * w;
        atb += row * (w / p.value);
    }
    let sol = ata
        .lu()
        .solve(&atb)
        .ok_or_else(|| Error::Resolution("singular Lorentzian fit".into()))?;
    let (alpha, beta, gamma) = (sol[0], sol[1], sol[2]);
    if !(gamma > 0.0) {
        return Err(Error::Resolution("Lorentzian fit has no peak".into()));
    }
    let c = -beta / (2.0 * gamma);
    let inv_amp = alpha - c * c * gamma;
    if !(inv_amp > 0.0) {
        return Err(Error::Resolution("Lorentzian fit has negative amplitude".into()));
    }
    let width = (inv_amp / gamma).sqrt() * hwhm;
    let ymax = window.iter().fold(0.0f64, |m, p| m.max(p.value));
    let mut ss = 0.0;
    for p in &window {
        let t = (p.kz - center) / hwhm;
        let model = 1.0 / (alpha + beta * t + gamma * t * t);
        ss += ((p.value - model) / ymax).powi(2);
    }
    Ok((width, (ss / window.len() as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::K0_REF;

    fn wire(r: f64, eps: f64) -> WireSystem {
        WireSystem::new(r, Complex64::new(eps, 0.0)).unwrap()
    }

    #[test]
    fn root_approaches_planar_value_from_above() {
        let planar = planar_spp(-75.0, K0_REF);
        let mut prev = f64::INFINITY;
        for r in [0.25, 1.0, 5.0] {
            let root = fundamental_root(&wire(r, -75.0), K0_REF).unwrap();
            assert!(root.residual < 1e-10);
            assert!(root.kz > planar && root.kz < prev);
            prev = root.kz;
        }
        assert!(prev / planar - 1.0 < 2e-3);
    }

    #[test]
    fn thin_wire_root_grows() {
        let r1 = fundamental_root(&wire(0.005, -75.0), K0_REF).unwrap();
        let r2 = fundamental_root(&wire(0.01, -75.0), K0_REF).unwrap();
        let r3 = fundamental_root(&wire(0.002, -75.0), K0_REF).unwrap();
        assert!(r1.kz > 3.0 * K0_REF);
        assert!(r3.kz > r1.kz && r1.kz > r2.kz);
    }

    #[test]
    fn higher_orders_cut_off_on_thin_wire() {
        assert!(mode_roots(&wire(0.01, -75.0), 1, K0_REF, DEFAULT_SEARCH_MAX).unwrap().is_empty());
    }

    #[test]
    fn root_zeroes_determinant() {
        let sys = wire(0.05, -75.0);
        let root = fundamental_root(&sys, K0_REF).unwrap();
        let at = crate::scatter::mode_determinant(&sys, 0, Complex64::new(root.kz, 0.0), K0_REF).unwrap();
        let off = crate::scatter::mode_determinant(&sys, 0, Complex64::new(root.kz * 1.01, 0.0), K0_REF).unwrap();
        assert!(at.norm() < 1e-8 * off.norm().max(1.0), "{at} vs {off}");
    }

    #[test]
    fn rejects_lossy_or_traveling() {
        let lossy = WireSystem::new(0.01, Complex64::new(-75.0, 0.6)).unwrap();
        assert!(mode_equation_residual(&lossy, 0, 2.0 * K0_REF, K0_REF).is_err());
        assert!(mode_equation_residual(&wire(0.01, -75.0), 0, 0.5 * K0_REF, K0_REF).is_err());
    }

    #[test]
    fn hwhm_of_exact_lorentzian() {
        let w = 0.3;
        let prof: Vec<ProfilePoint> = (0..401)
            .map(|i| {
                let kz = 10.0 + 4.0 * (i as f64 / 400.0 - 0.5);
                ProfilePoint { kz, value: 2.0 / (1.0 + ((kz - 10.05) / w).powi(2)) }
            })
            .collect();
        let fit = resonance_hwhm(&prof).unwrap();
        assert!((fit.k_peak - 10.05).abs() < 1e-3);
        assert!((fit.hwhm - w).abs() < 1e-3);
        assert!((fit.lorentzian_hwhm - w).abs() < 1e-9);
        assert!(fit.lorentzian_rms < 1e-9);
        let coarse: Vec<ProfilePoint> = prof.iter().step_by(40).copied().collect();
        assert!(matches!(resonance_hwhm(&coarse), Err(Error::Resolution(_))));
    }
}
