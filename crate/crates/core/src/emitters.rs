//! Decay rates of dipole emitters next to the wire.
//!
//! Every rate is Im[d̂₁ᵀ G(r₁, r₂) d̂₂] divided by k₀/6π, the coincident value
//! of Im G₀, so it comes out in units of the free-space rate Γ₀ at the same
//! frequency. The direct part uses the closed-form free-space tensor, the
//! reflected part the k_z quadrature of [`crate::greentensor`].
//!
//! The free-space tensor only has an imaginary part for |k_z| ≤ k₀, so it is
//! counted with the traveling contributions.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cylwave::CylPoint;
use crate::dispersion::{fundamental_root, mode_roots, width_estimate, DEFAULT_SEARCH_MAX};
use crate::greentensor::{
    green_direct_im, green_integrand_folded, green_reflected_order, green_reflected_split, CMatrix3, KzRegion, QuadratureSpec,
};
use crate::optimize::{golden_max, log_grid, Maximum};
use crate::quad::{integrate, QuadOptions};
use crate::scatter::WireSystem;
use crate::{Error, Result};

/// Smallest emitter-surface gap accepted, in units of λ₀. Closer in, the
/// near field diverges and the harmonic sum stops converging.
pub const MIN_GAP: f64 = 1e-3;

/// Γ₀ in the units of Im G: the coincident Im G₀ = k₀/6π.
pub fn rate_unit(k0: f64) -> f64 {
    k0 / (6.0 * std::f64::consts::PI)
}

/// A point dipole outside the wire.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Emitter {
    pub position: CylPoint,
    /// Unit dipole direction in the local (r̂, φ̂, ẑ) frame at `position`.
    pub dipole: [f64; 3],
}

impl Emitter {
    /// The dipole is normalized; it must be nonzero and finite.
    pub fn new(position: CylPoint, dipole: [f64; 3]) -> Result<Self> {
        let norm = dipole.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Precondition(format!("dipole {dipole:?} has no direction")));
        }
        if !(position.r > 0.0 && position.r.is_finite() && position.phi.is_finite() && position.z.is_finite()) {
            return Err(Error::Precondition(format!("emitter position {position:?} is invalid")));
        }
        Ok(Self { position, dipole: dipole.map(|x| x / norm) })
    }

    /// Radial dipole at distance `r` from the axis.
    pub fn radial(r: f64, phi: f64, z: f64) -> Result<Self> {
        Self::new(CylPoint::new(r, phi, z), [1.0, 0.0, 0.0])
    }

    /// Same emitter moved along the axis by `dz`.
    pub fn shifted(&self, dz: f64) -> Self {
        Self { position: CylPoint::new(self.position.r, self.position.phi, self.position.z + dz), ..*self }
    }

    /// Dipole direction in the global Cartesian frame.
    pub fn cartesian_dipole(&self) -> [f64; 3] {
        let (s, c) = self.position.phi.sin_cos();
        let [dr, dp, dz] = self.dipole;
        [dr * c - dp * s, dr * s + dp * c, dz]
    }
}

/// A rate with its estimated absolute error, both in units of Γ₀.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rate {
    pub value: f64,
    pub error: f64,
}

/// Total decay rate and its partition, in units of Γ₀.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    pub gamma_total: Rate,
    /// n = 0 evanescent part; `None` when the wire carries more than one guided mode.
    pub gamma_plasmon: Option<Rate>,
    /// |k_z| ≤ k₀, free-space part included.
    pub gamma_traveling: Rate,
    /// |k_z| > k₀.
    pub gamma_evanescent: Rate,
}

fn check_emitter(sys: &WireSystem, e: &Emitter) -> Result<()> {
    let gap = e.position.r - sys.radius;
    if !(gap >= MIN_GAP * (1.0 - 1e-9)) {
        return Err(Error::Precondition(format!(
            "emitter at r = {} is {gap:.3e} from the surface; the minimum gap is {MIN_GAP}",
            e.position.r
        )));
    }
    Ok(())
}

fn check_lossy(sys: &WireSystem) -> Result<()> {
    if !(sys.eps.im > 0.0) {
        return Err(Error::Precondition(
            "rates with evanescent contributions need a lossy wire (ε″ > 0)".into(),
        ));
    }
    Ok(())
}

fn project(m: &CMatrix3, d1: &[f64; 3], d2: &[f64; 3]) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..3 {
        for j in 0..3 {
            s += m[(i, j)] * d1[i] * d2[j];
        }
    }
    s
}

fn project_re(m: &nalgebra::Matrix3<f64>, d1: &[f64; 3], d2: &[f64; 3]) -> f64 {
    (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| m[(i, j)] * d1[i] * d2[j]).sum()
}

/// Bound on |d̂₁ᵀ M d̂₂| for unit dipoles given a max-norm error on M.
const PROJECTION_ERROR: f64 = 3.0;

/// Rates are measured against Γ₀, so the tensor needs no accuracy beyond a
/// small fraction of k₀/6π.
fn rate_floor(q: &QuadratureSpec, k0: f64) -> QuadratureSpec {
    QuadratureSpec { abs_tol: q.abs_tol.max(1e-2 * q.rel_tol * rate_unit(k0)), ..*q }
}

struct Split {
    traveling: Rate,
    evanescent: Rate,
}

fn pair_split(sys: &WireSystem, e1: &Emitter, e2: &Emitter, k0: f64, q: &QuadratureSpec, region: KzRegion) -> Result<Split> {
    let (d1, d2) = (e1.cartesian_dipole(), e2.cartesian_dipole());
    let unit = rate_unit(k0);
    let direct = project_re(&green_direct_im(e1.position, e2.position, k0), &d1, &d2) / unit;
    let g = green_reflected_split(sys, e1.position, e2.position, k0, &rate_floor(q, k0), region)?;
    Ok(Split {
        traveling: Rate {
            value: direct + project(&g.traveling.matrix, &d1, &d2).im / unit,
            error: PROJECTION_ERROR * g.traveling.error / unit,
        },
        evanescent: Rate {
            value: project(&g.evanescent.matrix, &d1, &d2).im / unit,
            error: PROJECTION_ERROR * g.evanescent.error / unit,
        },
    })
}

fn sum(a: Rate, b: Rate) -> Rate {
    Rate { value: a.value + b.value, error: a.error + b.error }
}

/// Total decay rate Γ_tot/Γ₀ at the reference frequency of `sys`.
pub fn gamma_total(sys: &WireSystem, e: &Emitter, q: &QuadratureSpec) -> Result<Rate> {
    gamma_total_at(sys, e, sys.k0(), q)
}

/// Γ_tot/Γ₀ at vacuum wavenumber `k0`, with ε held fixed.
pub fn gamma_total_at(sys: &WireSystem, e: &Emitter, k0: f64, q: &QuadratureSpec) -> Result<Rate> {
    check_emitter(sys, e)?;
    check_lossy(sys)?;
    let s = pair_split(sys, e, e, k0, q, KzRegion::All)?;
    Ok(sum(s.traveling, s.evanescent))
}

/// One point of a decay spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    /// ω/ω_A, equal to k/k₀.
    pub omega: f64,
    pub gamma: Rate,
}

/// Γ_tot(ω)/Γ₀(ω) for each ω/ω_A in `omegas`, with ε independent of ω.
pub fn decay_spectrum(sys: &WireSystem, e: &Emitter, omegas: &[f64], q: &QuadratureSpec) -> Result<Vec<SpectrumPoint>> {
    if omegas.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
        return Err(Error::Precondition("spectrum frequencies must be positive".into()));
    }
    omegas
        .par_iter()
        .map(|&w| Ok(SpectrumPoint { omega: w, gamma: gamma_total_at(sys, e, w * sys.k0(), q)? }))
        .collect()
}

/// Width of the enhancement around ω_A: the length of the contiguous interval
/// containing ω = 1 on which Γ(ω) stays above half of Γ(1). The second value
/// is false when the interval reaches an end of the grid, in which case the
/// width is a lower bound.
pub fn spectral_width(spectrum: &[SpectrumPoint]) -> Result<(f64, bool)> {
    let i0 = spectrum
        .iter()
        .position(|p| (p.omega - 1.0).abs() < 1e-12)
        .ok_or_else(|| Error::Precondition("spectrum grid must contain ω = ω_A".into()))?;
    let half = 0.5 * spectrum[i0].gamma.value;
    let cross = |a: &SpectrumPoint, b: &SpectrumPoint| {
        a.omega + (half - a.gamma.value) * (b.omega - a.omega) / (b.gamma.value - a.gamma.value)
    };
    let mut resolved = true;
    let mut lo = spectrum[0].omega;
    match (0..i0).rev().find(|&i| spectrum[i].gamma.value < half) {
        Some(i) => lo = cross(&spectrum[i], &spectrum[i + 1]),
        None => resolved = false,
    }
    let mut hi = spectrum[spectrum.len() - 1].omega;
    match (i0 + 1..spectrum.len()).find(|&i| spectrum[i].gamma.value < half) {
        Some(i) => hi = cross(&spectrum[i - 1], &spectrum[i]),
        None => resolved = false,
    }
    Ok((hi - lo, resolved))
}

/// Plasmon decay rate of a single-mode wire.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlasmonRate {
    pub rate: Rate,
    /// Lossless root of the guided mode.
    pub k_plasmon: f64,
    /// First-order resonance half width ε″|dk_z/dε′|.
    pub hwhm: f64,
    /// Part of the rate collected within ±10 half widths of the root.
    pub window_rate: f64,
}

/// Fails unless the lossless counterpart of `sys` guides only the n = 0 mode.
pub fn check_single_mode(sys: &WireSystem, k0: f64) -> Result<()> {
    let higher = mode_roots(&sys.lossless(), 1, k0, DEFAULT_SEARCH_MAX)?;
    if !higher.is_empty() {
        return Err(Error::Precondition(format!(
            "wire of radius {} guides an n = 1 mode at k_z = {:.6} k0; the plasmon rate needs a single-mode wire",
            sys.radius,
            higher[0].kz / k0
        )));
    }
    Ok(())
}

/// Rate into the fundamental plasmon: the evanescent n = 0 part of Γ_tot,
/// integrated over the whole evanescent range.
pub fn gamma_plasmon(sys: &WireSystem, e: &Emitter, q: &QuadratureSpec) -> Result<PlasmonRate> {
    check_emitter(sys, e)?;
    check_lossy(sys)?;
    let k0 = sys.k0();
    check_single_mode(sys, k0)?;
    let d = e.cartesian_dipole();
    let unit = rate_unit(k0);
    let g = green_reflected_order(sys, 0, e.position, e.position, k0, &rate_floor(q, k0), KzRegion::Evanescent)?;
    let rate = Rate {
        value: project(&g.evanescent.matrix, &d, &d).im / unit,
        error: PROJECTION_ERROR * g.evanescent.error / unit,
    };
    let root = fundamental_root(sys, k0)?;
    let hwhm = width_estimate(sys, 0, root.kz, k0)?;
    let lo = (root.kz - 10.0 * hwhm).max(k0 * (1.0 + 1e-6));
    let hi = root.kz + 10.0 * hwhm;
    let f = |kz: f64| -> Result<[f64; 1]> {
        Ok([project(&green_integrand_folded(sys, 0, kz, k0, e.position, e.position)?, &d, &d).im])
    };
    let opts = QuadOptions { rel_tol: q.rel_tol, ..Default::default() };
    let w = integrate(f, &[lo, root.kz - hwhm, root.kz, root.kz + hwhm, hi], opts)?;
    Ok(PlasmonRate { rate, k_plasmon: root.kz, hwhm, window_rate: w.value[0] / unit })
}

/// Pole contribution of the fundamental guided mode to Im[d̂₁ᵀ G d̂₂]/(k₀/6π)
/// for a lossless wire: π Re A, with A the residue of the folded n = 0 summand
/// at the root (the pole moves to Im k_z > 0 when ε″ > 0).
pub fn plasmon_pole_rate(sys: &WireSystem, e1: &Emitter, e2: &Emitter) -> Result<f64> {
    let k0 = sys.k0();
    let lossless = sys.lossless();
    let root = fundamental_root(&lossless, k0)?;
    let (d1, d2) = (e1.cartesian_dipole(), e2.cartesian_dipole());
    let f = |kz: f64| -> Result<Complex64> {
        Ok(project(&green_integrand_folded(&lossless, 0, kz, k0, e1.position, e2.position)?, &d1, &d2))
    };
    // symmetric difference quotient, second order in h
    let h = 1e-6 * (root.kz - k0).min(root.kz);
    let residue = 0.5 * (f(root.kz + h)? * h - f(root.kz - h)? * h);
    Ok(std::f64::consts::PI * residue.re / rate_unit(k0))
}

/// Rate into the guided mode for a lossless single-mode wire, from the pole.
pub fn gamma_plasmon_lossless(sys: &WireSystem, e: &Emitter) -> Result<f64> {
    check_emitter(sys, e)?;
    check_single_mode(sys, sys.k0())?;
    plasmon_pole_rate(sys, e, e)
}

/// Γ_tot split at |k_z| = k₀, with the plasmon part when the wire is single-mode.
pub fn traveling_evanescent_split(sys: &WireSystem, e: &Emitter, q: &QuadratureSpec) -> Result<RateReport> {
    check_emitter(sys, e)?;
    check_lossy(sys)?;
    let s = pair_split(sys, e, e, sys.k0(), q, KzRegion::All)?;
    let gamma_plasmon = match gamma_plasmon(sys, e, q) {
        Ok(p) => Some(p.rate),
        Err(Error::Precondition(_)) => None,
        Err(err) => return Err(err),
    };
    Ok(RateReport { gamma_total: sum(s.traveling, s.evanescent), gamma_plasmon, gamma_traveling: s.traveling, gamma_evanescent: s.evanescent })
}

/// Traveling-region rate |k_z| ≤ k₀ (free-space part included). Also valid
/// for a lossless wire.
pub fn gamma_traveling(sys: &WireSystem, e1: &Emitter, e2: &Emitter, q: &QuadratureSpec) -> Result<Rate> {
    check_emitter(sys, e1)?;
    check_emitter(sys, e2)?;
    Ok(pair_split(sys, e1, e2, sys.k0(), q, KzRegion::Traveling)?.traveling)
}

/// Cross rate Γ₁₂/Γ₀ between two emitters.
pub fn gamma_cross(sys: &WireSystem, e1: &Emitter, e2: &Emitter, q: &QuadratureSpec) -> Result<Rate> {
    let (t, e) = gamma_cross_split(sys, e1, e2, q)?;
    Ok(sum(t, e))
}

/// Γ₁₂ as (traveling, evanescent) parts.
pub fn gamma_cross_split(sys: &WireSystem, e1: &Emitter, e2: &Emitter, q: &QuadratureSpec) -> Result<(Rate, Rate)> {
    check_emitter(sys, e1)?;
    check_emitter(sys, e2)?;
    check_lossy(sys)?;
    let s = pair_split(sys, e1, e2, sys.k0(), q, KzRegion::All)?;
    Ok((s.traveling, s.evanescent))
}

/// Cross rate for a lossless single-mode wire: traveling part plus the pole
/// of the guided mode.
pub fn gamma_cross_lossless(sys: &WireSystem, e1: &Emitter, e2: &Emitter, q: &QuadratureSpec) -> Result<f64> {
    let lossless = sys.lossless();
    check_single_mode(&lossless, sys.k0())?;
    let t = gamma_traveling(&lossless, e1, e2, q)?;
    Ok(t.value + plasmon_pole_rate(&lossless, e1, e2)?)
}

/// One point of a Γ₁₂/Γ₁₁ sweep over the axial separation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossPoint {
    pub d: f64,
    pub gamma12: Rate,
    pub ratio: f64,
}

/// Γ₁₂/Γ₁₁ for the second emitter displaced along the axis by each `d`.
pub fn cross_sweep(sys: &WireSystem, e: &Emitter, separations: &[f64], q: &QuadratureSpec) -> Result<Vec<CrossPoint>> {
    let g11 = gamma_total(sys, e, q)?;
    separations
        .par_iter()
        .map(|&d| {
            let g12 = gamma_cross(sys, e, &e.shifted(d), q)?;
            Ok(CrossPoint { d, gamma12: g12, ratio: g12.value / g11.value })
        })
        .collect()
}

/// Same sweep for the lossless counterpart of `sys`.
pub fn cross_sweep_lossless(sys: &WireSystem, e: &Emitter, separations: &[f64], q: &QuadratureSpec) -> Result<Vec<(f64, f64)>> {
    let g11 = gamma_cross_lossless(sys, e, e, q)?;
    separations
        .par_iter()
        .map(|&d| Ok((d, gamma_cross_lossless(sys, e, &e.shifted(d), q)? / g11)))
        .collect()
}

/// Symmetric-state rate Γ_S = Γ₁₁ + Γ₁₂ split into its free-space (traveling)
/// and wire (evanescent) parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymDecomposition {
    pub gamma_s: Rate,
    pub gamma_s_free: Rate,
    pub gamma_s_wire: Rate,
}

impl SymDecomposition {
    pub fn ratio(&self) -> f64 {
        self.gamma_s_wire.value / self.gamma_s_free.value
    }
}

/// Partition of Γ_S for two emitters with the same wire distance. Meaningful
/// at subradiant separations, where the lossless plasmon share of Γ_S cancels
/// and the evanescent remainder is caused by wire losses.
pub fn gamma_sym_decomposition(sys: &WireSystem, e1: &Emitter, e2: &Emitter, q: &QuadratureSpec) -> Result<SymDecomposition> {
    check_emitter(sys, e1)?;
    check_emitter(sys, e2)?;
    check_lossy(sys)?;
    check_single_mode(sys, sys.k0())?;
    let s11 = pair_split(sys, e1, e1, sys.k0(), q, KzRegion::All)?;
    let s12 = pair_split(sys, e1, e2, sys.k0(), q, KzRegion::All)?;
    let free = sum(s11.traveling, s12.traveling);
    let wire = sum(s11.evanescent, s12.evanescent);
    Ok(SymDecomposition { gamma_s: sum(free, wire), gamma_s_free: free, gamma_s_wire: wire })
}

/// Objective for [`optimize_emitter_distance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistanceObjective {
    /// Γ_pl/Γ_tot of a radial emitter.
    PlasmonFraction,
    /// |Γ₁₂/Γ₁₁| at the extremum of Γ₁₂/Γ₁₁ nearest to the axial separation `d`.
    CrossContrast { d: f64 },
}

/// Result of an r_A optimization.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceOptimum {
    pub r_a: f64,
    pub value: f64,
    /// The best scan point was an end of the bracket; no interior maximum.
    pub at_boundary: bool,
    /// Coarse scan (r_A, objective) used to bracket the maximum.
    pub scan: Vec<(f64, f64)>,
    /// The scan rose and fell only once.
    pub unimodal: bool,
}

/// Γ_pl/Γ_tot for a radial emitter at `r_a`.
pub fn plasmon_fraction(sys: &WireSystem, r_a: f64, q: &QuadratureSpec) -> Result<f64> {
    let e = Emitter::radial(r_a, 0.0, 0.0)?;
    let pl = gamma_plasmon(sys, &e, q)?;
    let tot = gamma_total(sys, &e, q)?;
    Ok(pl.rate.value / tot.value)
}

/// Extremal |Γ₁₂/Γ₁₁| for radial emitters at `r_a`, searching the axial
/// separation within half a plasmon wavelength of `d`.
pub fn cross_contrast(sys: &WireSystem, r_a: f64, d: f64, q: &QuadratureSpec) -> Result<(f64, f64)> {
    let k0 = sys.k0();
    let e = Emitter::radial(r_a, 0.0, 0.0)?;
    let g11 = gamma_total(sys, &e, q)?.value;
    let half = std::f64::consts::PI / fundamental_root(sys, k0)?.kz;
    let lo = (d - half).max(1e-6);
    let hi = d + half;
    let f = |x: f64| Ok((gamma_cross(sys, &e, &e.shifted(x), q)?.value / g11).abs());
    // the magnitude has two humps per plasmon period; scan picks the one nearest d
    let grid: Vec<f64> = (0..9).map(|i| lo + (hi - lo) * i as f64 / 8.0).collect();
    let values: Vec<f64> = grid.par_iter().map(|&x| f(x)).collect::<Result<_>>()?;
    let nearest = (1..grid.len() - 1)
        .filter(|&i| values[i] >= values[i - 1] && values[i] >= values[i + 1])
        .min_by(|&a, &b| (grid[a] - d).abs().total_cmp(&(grid[b] - d).abs()));
    let m = match nearest {
        Some(i) => golden_max(f, grid[i - 1], grid[i + 1], 1e-4 * d.max(half))?,
        None => {
            let i = (0..grid.len()).fold(0, |b, i| if values[i] > values[b] { i } else { b });
            Maximum { x: grid[i], value: values[i], at_boundary: true }
        }
    };
    Ok((m.x, m.value))
}

/// Maximize `objective` over r_A ∈ `bounds` (radial emitters). A log-spaced
/// scan in the gap r_A − R brackets the maximum and golden-section search
/// refines it to 1e-3 relative in r_A.
pub fn optimize_emitter_distance(
    sys: &WireSystem,
    objective: DistanceObjective,
    bounds: (f64, f64),
    scan_points: usize,
    q: &QuadratureSpec,
) -> Result<DistanceOptimum> {
    let (lo, hi) = bounds;
    if !(lo - sys.radius >= MIN_GAP * (1.0 - 1e-9) && hi > lo) {
        return Err(Error::Precondition(format!(
            "r_A bounds ({lo}, {hi}) must be ordered and at least {MIN_GAP} outside R = {}",
            sys.radius
        )));
    }
    if scan_points < 5 {
        return Err(Error::Precondition("the r_A scan needs at least 5 points".into()));
    }
    let eval = |r: f64| -> Result<f64> {
        match objective {
            DistanceObjective::PlasmonFraction => plasmon_fraction(sys, r, q),
            DistanceObjective::CrossContrast { d } => Ok(cross_contrast(sys, r, d, q)?.1),
        }
    };
    let grid: Vec<f64> = log_grid(lo - sys.radius, hi - sys.radius, scan_points).into_iter().map(|g| g + sys.radius).collect();
    let values: Vec<f64> = grid.par_iter().map(|&r| eval(r)).collect::<Result<_>>()?;
    let scan: Vec<(f64, f64)> = grid.iter().copied().zip(values.iter().copied()).collect();
    let best = (0..values.len()).fold(0, |b, i| if values[i] > values[b] { i } else { b });
    let turns = values.windows(3).filter(|w| (w[1] - w[0]) * (w[2] - w[1]) < 0.0).count();
    let unimodal = turns <= 1;
    if best == 0 || best + 1 == grid.len() {
        return Ok(DistanceOptimum { r_a: grid[best], value: values[best], at_boundary: true, scan, unimodal });
    }
    let m = golden_max(eval, grid[best - 1], grid[best + 1], 1e-3 * grid[best])?;
    let (r_a, value) = if m.value >= values[best] { (m.x, m.value) } else { (grid[best], values[best]) };
    Ok(DistanceOptimum { r_a, value, at_boundary: false, scan, unimodal })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wire() -> WireSystem {
        WireSystem::new(0.01, Complex64::new(-75.0, 0.6)).unwrap()
    }

    fn q() -> QuadratureSpec {
        QuadratureSpec::default().with_rel_tol(1e-5)
    }

    #[test]
    fn dipole_frames() {
        let e = Emitter::new(CylPoint::new(0.1, std::f64::consts::FRAC_PI_2, 0.0), [0.0, 2.0, 0.0]).unwrap();
        let d = e.cartesian_dipole();
        assert!((d[0] + 1.0).abs() < 1e-15 && d[1].abs() < 1e-15);
        assert!(Emitter::new(CylPoint::new(0.1, 0.0, 0.0), [0.0; 3]).is_err());
    }

    #[test]
    fn far_emitter_decays_as_in_vacuum() {
        let g = gamma_total(&wire(), &Emitter::radial(1.0, 0.0, 0.0).unwrap(), &q()).unwrap();
        assert!((g.value - 1.0).abs() < 0.01, "{g:?}");
    }

    #[test]
    fn close_emitter_enhanced_and_partitioned() {
        let sys = wire();
        let e = Emitter::radial(0.015, 0.0, 0.0).unwrap();
        let r = traveling_evanescent_split(&sys, &e, &q()).unwrap();
        assert!(r.gamma_total.value > 100.0);
        let parts = r.gamma_traveling.value + r.gamma_evanescent.value;
        assert!((parts - r.gamma_total.value).abs() <= r.gamma_total.error + 1e-12);
        let pl = r.gamma_plasmon.unwrap();
        assert!(pl.value > 0.0 && pl.value <= r.gamma_evanescent.value + r.gamma_evanescent.error);
    }

    #[test]
    fn refuses_tiny_gap_and_lossless_total() {
        let sys = wire();
        assert!(matches!(gamma_total(&sys, &Emitter::radial(0.0105, 0.0, 0.0).unwrap(), &q()), Err(Error::Precondition(_))));
        let e = Emitter::radial(0.02, 0.0, 0.0).unwrap();
        assert!(matches!(gamma_total(&sys.lossless(), &e, &q()), Err(Error::Precondition(_))));
    }

    #[test]
    fn multimode_wire_has_no_single_plasmon_rate() {
        let sys = WireSystem::new(0.5, Complex64::new(-75.0, 0.6)).unwrap();
        let e = Emitter::radial(0.6, 0.0, 0.0).unwrap();
        assert!(matches!(gamma_plasmon(&sys, &e, &q()), Err(Error::Precondition(_))));
    }

    #[test]
    fn cross_rate_is_symmetric_and_coincides() {
        let sys = wire();
        let a = Emitter::radial(0.02, 0.3, 0.1).unwrap();
        let b = Emitter::new(CylPoint::new(0.02, 0.3, 0.55), [0.6, 0.0, 0.8]).unwrap();
        let ab = gamma_cross(&sys, &a, &b, &q()).unwrap();
        let ba = gamma_cross(&sys, &b, &a, &q()).unwrap();
        assert!((ab.value - ba.value).abs() <= 1e-9 * ab.value.abs().max(1.0), "{ab:?} {ba:?}");
        let aa = gamma_cross(&sys, &a, &a, &q()).unwrap();
        let g = gamma_total(&sys, &a, &q()).unwrap();
        assert_eq!(aa.value, g.value);
    }

    #[test]
    fn pole_rate_matches_vanishing_loss() {
        // Γ_pl(ε″) is linear in ε″ for small losses; extrapolate to zero
        let base = WireSystem::new(0.01, Complex64::new(-75.0, 0.0)).unwrap();
        let e = Emitter::radial(0.02, 0.0, 0.0).unwrap();
        let q = QuadratureSpec::default().with_rel_tol(1e-7);
        let at = |x: f64| gamma_plasmon(&base.with_eps(Complex64::new(-75.0, x)).unwrap(), &e, &q).unwrap().rate.value;
        let (x1, x2) = (0.02, 0.04);
        let (y1, y2) = (at(x1), at(x2));
        let extrapolated = y1 - x1 * (y2 - y1) / (x2 - x1);
        let pole = gamma_plasmon_lossless(&base, &e).unwrap();
        assert!(pole > 0.0);
        assert!((pole / extrapolated - 1.0).abs() < 0.02, "pole {pole} extrapolated {extrapolated}");
    }
}
