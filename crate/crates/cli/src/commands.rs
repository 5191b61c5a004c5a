//! One function per subcommand: validate, compute, tabulate.

use clap::{Args, Subcommand, ValueEnum};
use plasmonwire::dispersion::{
    fundamental_root, mode_roots, planar_spp, resonance_hwhm, resonance_profile_auto, width_estimate, DEFAULT_SEARCH_MAX,
};
use plasmonwire::dynamics::{gate_scaling, nanowire_gate_fidelity};
use plasmonwire::emitters::{
    cross_sweep, cross_sweep_lossless, decay_spectrum, gamma_cross_lossless, gamma_plasmon, gamma_sym_decomposition, gamma_total,
    optimize_emitter_distance, spectral_width, traveling_evanescent_split, DistanceObjective, Emitter, MIN_GAP,
};
use plasmonwire::greentensor::QuadratureSpec;
use plasmonwire::scatter::WireSystem;
use plasmonwire::selftest::run_selftest;
use plasmonwire::{Complex64, K0_REF};
use rayon::prelude::*;

use crate::table::{Cell, Table};
use crate::{Failure, QuadArgs};

type Out<T> = Result<T, Failure>;

/// Longest accepted sweep.
const MAX_GRID: usize = 100_000;

#[derive(Args, Debug, Clone)]
pub struct WireArgs {
    /// Wire radius R.
    #[arg(long = "R", default_value_t = 0.01)]
    pub radius: f64,
    /// Real part of the metal permittivity.
    #[arg(long, default_value_t = -75.0, allow_negative_numbers = true)]
    pub eps_re: f64,
    /// Imaginary part of the metal permittivity.
    #[arg(long, default_value_t = 0.6)]
    pub eps_im: f64,
}

impl WireArgs {
    fn system(&self) -> Out<WireSystem> {
        Ok(WireSystem::new(self.radius, Complex64::new(self.eps_re, self.eps_im))?)
    }

    fn record(&self, t: &mut Table) {
        t.meta_num("R", self.radius);
        t.meta_num("eps_re", self.eps_re);
        t.meta_num("eps_im", self.eps_im);
    }
}

fn config(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

fn quad(q: &QuadArgs, t: &mut Table) -> Out<QuadratureSpec> {
    let spec = q.spec();
    spec.validate(K0_REF)?;
    t.meta_num("rel_tol", spec.rel_tol);
    t.meta_num("abs_tol", spec.abs_tol);
    t.meta("n_max", spec.n_max);
    Ok(spec)
}

fn check_range(name: &str, lo: f64, hi: f64) -> Out<()> {
    if !(lo.is_finite() && hi.is_finite() && hi >= lo) {
        return Err(config(format!("{name} range [{lo}, {hi}] is invalid")));
    }
    Ok(())
}

/// `lo, lo + step, …` up to `hi` inclusive.
fn linear_grid(name: &str, lo: f64, hi: f64, step: f64) -> Out<Vec<f64>> {
    check_range(name, lo, hi)?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(config(format!("{name} step {step} must be positive")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() + 1.0;
    if count > MAX_GRID as f64 {
        return Err(config(format!("{name} grid has {count} points; the limit is {MAX_GRID}")));
    }
    Ok((0..count as usize).map(|i| lo + step * i as f64).collect())
}

/// `points` values log-spaced over [lo, hi] (lo > 0).
fn log_grid(name: &str, lo: f64, hi: f64, points: usize) -> Out<Vec<f64>> {
    check_range(name, lo, hi)?;
    if !(lo > 0.0) || points == 0 || points > MAX_GRID {
        return Err(config(format!("{name} log grid needs a positive start and 1..={MAX_GRID} points")));
    }
    if points == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..points).map(|i| lo * (hi / lo).powf(i as f64 / (points - 1) as f64)).collect())
}

/// Emitter distances from the axis, log-spaced in the gap to the surface.
fn distance_grid(radius: f64, lo: Option<f64>, hi: Option<f64>, default_hi_gap: f64, points: usize) -> Out<Vec<f64>> {
    let lo = lo.unwrap_or(radius + MIN_GAP);
    let hi = hi.unwrap_or(radius + default_hi_gap);
    check_gap(radius, lo)?;
    Ok(log_grid("r_A", lo - radius, hi - radius, points)?.into_iter().map(|g| g + radius).collect())
}

fn check_gap(radius: f64, r_a: f64) -> Out<()> {
    if !(r_a - radius >= MIN_GAP * (1.0 - 1e-9)) {
        return Err(config(format!("r_A = {r_a} must be at least {MIN_GAP} outside R = {radius}")));
    }
    Ok(())
}

fn dipole(v: &[f64], r_a: f64) -> Out<Emitter> {
    let [a, b, c] = v else {
        return Err(config(format!("dipole needs three components (r, phi, z), got {}", v.len())));
    };
    Ok(Emitter::new(plasmonwire::cylwave::CylPoint::new(r_a, 0.0, 0.0), [*a, *b, *c])?)
}

// ---------------------------------------------------------------- modes

#[derive(Args, Debug, Clone)]
pub struct ModesArgs {
    /// Real permittivity of the lossless metal.
    #[arg(long, default_value_t = -75.0, allow_negative_numbers = true)]
    pub eps_re: f64,
    #[arg(long, default_value_t = 0.005)]
    pub r_min: f64,
    #[arg(long, default_value_t = 0.5)]
    pub r_max: f64,
    /// Number of radii, log-spaced.
    #[arg(long, default_value_t = 40)]
    pub points: usize,
    /// Cylindrical orders to tabulate.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
    pub orders: Vec<u32>,
}

/// Largest guided k_z/k₀ of each order; empty below cutoff.
pub fn modes(a: &ModesArgs) -> Out<Table> {
    if a.orders.is_empty() {
        return Err(config("no orders requested"));
    }
    let radii = log_grid("R", a.r_min, a.r_max, a.points)?;
    let systems: Vec<WireSystem> =
        radii.iter().map(|&r| WireSystem::new(r, Complex64::new(a.eps_re, 0.0))).collect::<Result<_, _>>()?;
    if !(a.eps_re < -1.0) {
        return Err(config(format!("guided plasmons need eps_re < -1, got {}", a.eps_re)));
    }
    let mut t = Table::new(std::iter::once("R".to_string()).chain(a.orders.iter().map(|n| format!("kz_over_k0_n{n}"))));
    t.meta("command", "modes");
    t.meta_num("eps_re", a.eps_re);
    t.meta_num("r_min", a.r_min);
    t.meta_num("r_max", a.r_max);
    t.meta("points", a.points);
    t.meta("orders", a.orders.iter().map(u32::to_string).collect::<Vec<_>>().join(";"));
    t.meta_num("search_max_over_k0", DEFAULT_SEARCH_MAX);
    t.meta_num("planar_kz_over_k0", planar_spp(a.eps_re, K0_REF) / K0_REF);
    let rows: Vec<Vec<Cell>> = systems
        .par_iter()
        .map(|sys| {
            let mut row = vec![Cell::Num(sys.radius)];
            for &n in &a.orders {
                let roots = mode_roots(sys, n, K0_REF, DEFAULT_SEARCH_MAX)?;
                row.push(roots.last().map(|r| r.kz / K0_REF).into());
            }
            Ok(row)
        })
        .collect::<plasmonwire::Result<_>>()?;
    rows.into_iter().for_each(|r| t.row(r));
    Ok(t)
}

// ---------------------------------------------------------------- resonance

#[derive(Subcommand, Debug, Clone)]
pub enum ResonanceCmd {
    /// Im G⁽ⁿ⁼⁰⁾(k_z) across the lossy plasmon peak.
    Profile(ProfileArgs),
    /// Peak half width over a set of radii and losses.
    Width(WidthArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub wire: WireArgs,
    /// Probe distance r_A − R.
    #[arg(long, default_value_t = 0.005)]
    pub gap: f64,
}

#[derive(Args, Debug, Clone)]
pub struct WidthArgs {
    #[arg(long, default_value_t = -75.0, allow_negative_numbers = true)]
    pub eps_re: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.005,0.01,0.02,0.03,0.1,0.2,0.3")]
    pub radii: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.15,0.3,0.6")]
    pub eps_im: Vec<f64>,
    /// Probe distance r_A − R.
    #[arg(long, default_value_t = 0.005)]
    pub gap: f64,
}

pub fn resonance(c: &ResonanceCmd) -> Out<Table> {
    match c {
        ResonanceCmd::Profile(a) => {
            let sys = a.wire.system()?;
            check_gap(a.wire.radius, a.wire.radius + a.gap)?;
            let mut t = Table::new(["kz_over_k0", "im_g_rr"]);
            t.meta("command", "resonance profile");
            a.wire.record(&mut t);
            t.meta_num("gap", a.gap);
            let profile = resonance_profile_auto(&sys, a.wire.radius + a.gap, K0_REF)?;
            let fit = resonance_hwhm(&profile)?;
            t.meta_num("result_k_peak_over_k0", fit.k_peak / K0_REF);
            t.meta_num("result_hwhm_over_k0", fit.hwhm / K0_REF);
            for p in profile {
                t.row(vec![(p.kz / K0_REF).into(), p.value.into()]);
            }
            Ok(t)
        }
        ResonanceCmd::Width(a) => {
            if a.radii.is_empty() || a.eps_im.is_empty() {
                return Err(config("width table needs at least one radius and one eps_im"));
            }
            let mut cases = Vec::new();
            for &r in &a.radii {
                for &ei in &a.eps_im {
                    if !(ei > 0.0) {
                        return Err(config(format!("resonance width needs eps_im > 0, got {ei}")));
                    }
                    check_gap(r, r + a.gap)?;
                    cases.push(WireSystem::new(r, Complex64::new(a.eps_re, ei))?);
                }
            }
            let mut t = Table::new([
                "R",
                "eps_im",
                "k_peak_over_k0",
                "hwhm_over_k0",
                "lorentzian_hwhm_over_k0",
                "lorentzian_rms",
                "first_order_hwhm_over_k0",
            ]);
            t.meta("command", "resonance width");
            t.meta_num("eps_re", a.eps_re);
            t.meta_list("radii", &a.radii);
            t.meta_list("eps_im", &a.eps_im);
            t.meta_num("gap", a.gap);
            let rows: Vec<Vec<Cell>> = cases
                .par_iter()
                .map(|sys| {
                    let fit = resonance_hwhm(&resonance_profile_auto(sys, sys.radius + a.gap, K0_REF)?)?;
                    let root = fundamental_root(sys, K0_REF)?;
                    let first = width_estimate(sys, 0, root.kz, K0_REF)?;
                    Ok(vec![
                        sys.radius.into(),
                        sys.eps.im.into(),
                        (fit.k_peak / K0_REF).into(),
                        (fit.hwhm / K0_REF).into(),
                        (fit.lorentzian_hwhm / K0_REF).into(),
                        fit.lorentzian_rms.into(),
                        (first / K0_REF).into(),
                    ])
                })
                .collect::<plasmonwire::Result<_>>()?;
            rows.into_iter().for_each(|r| t.row(r));
            Ok(t)
        }
    }
}

// ---------------------------------------------------------------- decay

#[derive(Subcommand, Debug, Clone)]
pub enum DecayCmd {
    /// Γ_tot and its traveling/evanescent/plasmon parts versus r_A.
    Grid(DecayGridArgs),
    /// Γ(ω)/Γ₀(ω) at fixed r_A; ω in units of the emitter frequency.
    Spectrum(SpectrumArgs),
}

#[derive(Args, Debug, Clone)]
pub struct DecayGridArgs {
    #[command(flatten)]
    pub wire: WireArgs,
    /// Dipole direction (r, phi, z) in the local frame.
    #[arg(long, value_delimiter = ',', default_value = "1,0,0", allow_negative_numbers = true)]
    pub dipole: Vec<f64>,
    /// Smallest r_A (default R + 0.001).
    #[arg(long = "ra-min")]
    pub ra_min: Option<f64>,
    /// Largest r_A (default R + 1).
    #[arg(long = "ra-max")]
    pub ra_max: Option<f64>,
    /// Number of distances, log-spaced in r_A − R.
    #[arg(long, default_value_t = 25)]
    pub points: usize,
}

#[derive(Args, Debug, Clone)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub wire: WireArgs,
    #[arg(long = "rA", default_value_t = 0.015)]
    pub r_a: f64,
    #[arg(long, value_delimiter = ',', default_value = "1,0,0", allow_negative_numbers = true)]
    pub dipole: Vec<f64>,
    #[arg(long, default_value_t = 0.25)]
    pub omega_min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub omega_max: f64,
    #[arg(long, default_value_t = 0.05)]
    pub omega_step: f64,
}

pub fn decay(c: &DecayCmd, q: &QuadArgs) -> Out<Table> {
    match c {
        DecayCmd::Grid(a) => {
            let sys = a.wire.system()?;
            let grid = distance_grid(a.wire.radius, a.ra_min, a.ra_max, 1.0, a.points)?;
            let emitters: Vec<Emitter> = grid.iter().map(|&r| dipole(&a.dipole, r)).collect::<Out<_>>()?;
            let mut t = Table::new([
                "rA",
                "gamma_total",
                "gamma_total_error",
                "gamma_traveling",
                "gamma_evanescent",
                "gamma_plasmon",
            ]);
            t.meta("command", "decay grid");
            a.wire.record(&mut t);
            t.meta_list("dipole", &emitters[0].dipole);
            t.meta_num("ra_min", grid[0]);
            t.meta_num("ra_max", grid[grid.len() - 1]);
            t.meta("points", a.points);
            let spec = quad(q, &mut t)?;
            let rows: Vec<Vec<Cell>> = emitters
                .par_iter()
                .map(|e| {
                    let rep = traveling_evanescent_split(&sys, e, &spec)?;
                    Ok(vec![
                        e.position.r.into(),
                        rep.gamma_total.value.into(),
                        rep.gamma_total.error.into(),
                        rep.gamma_traveling.value.into(),
                        rep.gamma_evanescent.value.into(),
                        rep.gamma_plasmon.map(|r| r.value).into(),
                    ])
                })
                .collect::<plasmonwire::Result<_>>()?;
            rows.into_iter().for_each(|r| t.row(r));
            Ok(t)
        }
        DecayCmd::Spectrum(a) => {
            let sys = a.wire.system()?;
            check_gap(a.wire.radius, a.r_a)?;
            let e = dipole(&a.dipole, a.r_a)?;
            let omegas = linear_grid("omega", a.omega_min, a.omega_max, a.omega_step)?;
            if !(a.omega_min > 0.0) {
                return Err(config("frequencies must be positive"));
            }
            let mut t = Table::new(["omega", "gamma_over_gamma0"]);
            t.meta("command", "decay spectrum");
            a.wire.record(&mut t);
            t.meta_num("rA", a.r_a);
            t.meta_list("dipole", &e.dipole);
            t.meta_num("omega_min", a.omega_min);
            t.meta_num("omega_max", a.omega_max);
            t.meta_num("omega_step", a.omega_step);
            let spec = quad(q, &mut t)?;
            let spectrum = decay_spectrum(&sys, &e, &omegas, &spec)?;
            match spectral_width(&spectrum) {
                Ok((w, resolved)) => {
                    t.meta_num("result_width", w);
                    t.meta("result_width_resolved", resolved);
                }
                Err(err) => t.meta("result_width", format!("unavailable ({err})")),
            }
            for p in spectrum {
                t.row(vec![p.omega.into(), p.gamma.value.into()]);
            }
            Ok(t)
        }
    }
}

// ---------------------------------------------------------------- plasmon fraction

#[derive(Args, Debug, Clone)]
pub struct FractionArgs {
    #[command(flatten)]
    pub wire: WireArgs,
    /// Smallest r_A (default R + 0.001).
    #[arg(long = "ra-min")]
    pub ra_min: Option<f64>,
    /// Largest r_A (default R + 0.1).
    #[arg(long = "ra-max")]
    pub ra_max: Option<f64>,
    #[arg(long, default_value_t = 25)]
    pub points: usize,
}

pub fn plasmon_fraction(a: &FractionArgs, q: &QuadArgs) -> Out<Table> {
    let sys = a.wire.system()?;
    let grid = distance_grid(a.wire.radius, a.ra_min, a.ra_max, 0.1, a.points)?;
    let mut t = Table::new(["rA", "plasmon_fraction", "gamma_plasmon", "gamma_total", "gamma_plasmon_window"]);
    t.meta("command", "plasmon-fraction");
    a.wire.record(&mut t);
    t.meta_num("ra_min", grid[0]);
    t.meta_num("ra_max", grid[grid.len() - 1]);
    t.meta("points", a.points);
    let spec = quad(q, &mut t)?;
    let rows: Vec<Vec<Cell>> = grid
        .par_iter()
        .map(|&r| {
            let e = Emitter::radial(r, 0.0, 0.0)?;
            let pl = gamma_plasmon(&sys, &e, &spec)?;
            let tot = gamma_total(&sys, &e, &spec)?;
            Ok(vec![
                r.into(),
                (pl.rate.value / tot.value).into(),
                pl.rate.value.into(),
                tot.value.into(),
                pl.window_rate.into(),
            ])
        })
        .collect::<plasmonwire::Result<_>>()?;
    rows.into_iter().for_each(|r| t.row(r));
    Ok(t)
}

// ---------------------------------------------------------------- cross

#[derive(Args, Debug, Clone)]
pub struct CrossArgs {
    #[command(flatten)]
    pub wire: WireArgs,
    /// Distance of both (radial) emitters from the axis.
    #[arg(long = "rA", default_value_t = 0.015)]
    pub r_a: f64,
    #[arg(long, default_value_t = 0.05)]
    pub d_min: f64,
    #[arg(long, default_value_t = 5.0)]
    pub d_max: f64,
    #[arg(long, default_value_t = 0.025)]
    pub d_step: f64,
    /// Use the lossless counterpart of the wire (plasmon pole by residue).
    #[arg(long)]
    pub lossless: bool,
}

pub fn cross(a: &CrossArgs, q: &QuadArgs) -> Out<Table> {
    let sys = a.wire.system()?;
    check_gap(a.wire.radius, a.r_a)?;
    let ds = linear_grid("d", a.d_min, a.d_max, a.d_step)?;
    let e = Emitter::radial(a.r_a, 0.0, 0.0)?;
    let header: &[&str] = if a.lossless { &["d", "ratio"] } else { &["d", "gamma12", "gamma12_error", "ratio"] };
    let mut t = Table::new(header.iter().copied());
    t.meta("command", "cross");
    a.wire.record(&mut t);
    t.meta_num("rA", a.r_a);
    t.meta_num("d_min", a.d_min);
    t.meta_num("d_max", a.d_max);
    t.meta_num("d_step", a.d_step);
    t.meta("lossless", a.lossless);
    let spec = quad(q, &mut t)?;
    let k_pl = fundamental_root(&sys, K0_REF)?.kz;
    t.meta_num("result_k_plasmon_over_k0", k_pl / K0_REF);
    t.meta_num("result_plasmon_period", K0_REF / k_pl);
    if a.lossless {
        let lossless = sys.lossless();
        t.meta_num("result_gamma11", gamma_cross_lossless(&lossless, &e, &e, &spec)?);
        for (d, ratio) in cross_sweep_lossless(&lossless, &e, &ds, &spec)? {
            t.row(vec![d.into(), ratio.into()]);
        }
    } else {
        t.meta_num("result_gamma11", gamma_total(&sys, &e, &spec)?.value);
        for p in cross_sweep(&sys, &e, &ds, &spec)? {
            t.row(vec![p.d.into(), p.gamma12.value.into(), p.gamma12.error.into(), p.ratio.into()]);
        }
    }
    Ok(t)
}

// ---------------------------------------------------------------- optimum

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    /// Γ_pl/Γ_tot.
    PlasmonFraction,
    /// |Γ₁₂/Γ₁₁| at the extremum nearest `--d`.
    CrossContrast,
}

#[derive(Args, Debug, Clone)]
pub struct OptimumArgs {
    #[command(flatten)]
    pub wire: WireArgs,
    #[arg(long, value_enum, default_value_t = Objective::PlasmonFraction)]
    pub objective: Objective,
    /// Axial separation for the cross-contrast objective.
    #[arg(long)]
    pub d: Option<f64>,
    /// Smallest r_A (default R + 0.001).
    #[arg(long = "ra-min")]
    pub ra_min: Option<f64>,
    /// Largest r_A (default R + 0.1).
    #[arg(long = "ra-max")]
    pub ra_max: Option<f64>,
    #[arg(long, default_value_t = 9)]
    pub scan_points: usize,
}

pub fn optimum(a: &OptimumArgs, q: &QuadArgs) -> Out<Table> {
    let sys = a.wire.system()?;
    let lo = a.ra_min.unwrap_or(a.wire.radius + MIN_GAP);
    let hi = a.ra_max.unwrap_or(a.wire.radius + 0.1);
    check_gap(a.wire.radius, lo)?;
    check_range("r_A", lo, hi)?;
    let objective = match (a.objective, a.d) {
        (Objective::PlasmonFraction, None) => DistanceObjective::PlasmonFraction,
        (Objective::PlasmonFraction, Some(_)) => return Err(config("--d only applies to the cross-contrast objective")),
        (Objective::CrossContrast, Some(d)) if d > 0.0 && d.is_finite() => DistanceObjective::CrossContrast { d },
        (Objective::CrossContrast, _) => return Err(config("cross-contrast objective needs --d > 0")),
    };
    let mut t = Table::new(["kind", "rA", "value"]);
    t.meta("command", "optimum");
    a.wire.record(&mut t);
    t.meta("objective", a.objective.to_possible_value().expect("no skipped variants").get_name());
    if let Some(d) = a.d {
        t.meta_num("d", d);
    }
    t.meta_num("ra_min", lo);
    t.meta_num("ra_max", hi);
    t.meta("scan_points", a.scan_points);
    let spec = quad(q, &mut t)?;
    let opt = optimize_emitter_distance(&sys, objective, (lo, hi), a.scan_points, &spec)?;
    t.meta("result_at_boundary", opt.at_boundary);
    t.meta("result_unimodal", opt.unimodal);
    for &(r, v) in &opt.scan {
        t.row(vec!["scan".into(), r.into(), v.into()]);
    }
    t.row(vec!["optimum".into(), opt.r_a.into(), opt.value.into()]);
    Ok(t)
}

// ---------------------------------------------------------------- gate

#[derive(Subcommand, Debug, Clone)]
pub enum GateCmd {
    /// Optimized infidelity versus Γ_S/Γ_eg for Γ_eg = 1, Γ_AS = 2 − Γ_S.
    Scaling(ScalingArgs),
    /// Optimized fidelity with rates from the wire, versus r_A.
    Nanowire(NanowireArgs),
    /// Γ_S split into wire and free-space parts at subradiant separations.
    Decomposition(DecompositionArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ScalingArgs {
    #[arg(long, value_delimiter = ',', default_value = "1e-4,3e-4,1e-3,3e-3,1e-2,3e-2,1e-1")]
    pub ratios: Vec<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct NanowireArgs {
    #[command(flatten)]
    pub wire: WireArgs,
    /// Axial separation of the two emitters.
    #[arg(long, default_value_t = 0.08)]
    pub d: f64,
    /// Emitter distances r_A − R to sweep.
    #[arg(long, value_delimiter = ',', default_value = "0.001,0.002,0.003,0.005,0.007,0.01,0.014,0.022")]
    pub gaps: Vec<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct DecompositionArgs {
    #[arg(long = "R", default_value_t = 0.01)]
    pub radius: f64,
    #[arg(long, default_value_t = -75.0, allow_negative_numbers = true)]
    pub eps_re: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.025,0.1,0.4")]
    pub eps_im: Vec<f64>,
    #[arg(long = "rA", default_value_t = 0.015)]
    pub r_a: f64,
    /// Separations d_m = (m + 1/2) λ_p for m = 0..=m_max.
    #[arg(long, default_value_t = 9)]
    pub m_max: u32,
}

pub fn gate(c: &GateCmd, q: &QuadArgs) -> Out<Table> {
    match c {
        GateCmd::Scaling(a) => {
            if a.ratios.is_empty() {
                return Err(config("no ratios given"));
            }
            if let Some(x) = a.ratios.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
                return Err(config(format!("Γ_S/Γ_eg = {x} must lie in (0, 1)")));
            }
            let mut t = Table::new(["ratio", "omega_opt", "infidelity"]);
            t.meta("command", "gate scaling");
            t.meta_list("ratios", &a.ratios);
            for p in gate_scaling(&a.ratios)? {
                t.row(vec![p.ratio.into(), p.omega_opt.into(), p.infidelity.into()]);
            }
            Ok(t)
        }
        GateCmd::Nanowire(a) => {
            let sys = a.wire.system()?;
            if a.gaps.is_empty() || !(a.d > 0.0 && a.d.is_finite()) {
                return Err(config("nanowire gate needs --d > 0 and at least one gap"));
            }
            let radii: Vec<f64> = a.gaps.iter().map(|g| a.wire.radius + g).collect();
            for &r in &radii {
                check_gap(a.wire.radius, r)?;
            }
            let mut t = Table::new(["rA", "gamma11", "gamma12", "gamma_s", "gamma_as", "omega_opt", "fidelity", "at_boundary"]);
            t.meta("command", "gate nanowire");
            a.wire.record(&mut t);
            t.meta_num("d", a.d);
            t.meta_list("gaps", &a.gaps);
            let spec = quad(q, &mut t)?;
            let rows: Vec<Vec<Cell>> = radii
                .par_iter()
                .map(|&r| {
                    let g = nanowire_gate_fidelity(&sys, r, a.d, &spec)?;
                    Ok(vec![
                        r.into(),
                        g.rates.gamma11.into(),
                        g.rates.gamma12.into(),
                        g.rates.gamma_s().into(),
                        g.rates.gamma_as().into(),
                        g.optimum.omega_opt.into(),
                        g.optimum.f_opt.into(),
                        g.optimum.at_boundary.into(),
                    ])
                })
                .collect::<plasmonwire::Result<_>>()?;
            rows.into_iter().for_each(|r| t.row(r));
            Ok(t)
        }
        GateCmd::Decomposition(a) => {
            check_gap(a.radius, a.r_a)?;
            if a.eps_im.is_empty() {
                return Err(config("no eps_im values given"));
            }
            let systems: Vec<WireSystem> =
                a.eps_im.iter().map(|&ei| WireSystem::new(a.radius, Complex64::new(a.eps_re, ei))).collect::<Result<_, _>>()?;
            let e = Emitter::radial(a.r_a, 0.0, 0.0)?;
            let mut t = Table::new(["eps_im", "m", "d", "gamma_s", "gamma_s_free", "gamma_s_wire", "ratio"]);
            t.meta("command", "gate decomposition");
            t.meta_num("R", a.radius);
            t.meta_num("eps_re", a.eps_re);
            t.meta_list("eps_im", &a.eps_im);
            t.meta_num("rA", a.r_a);
            t.meta("m_max", a.m_max);
            let spec = quad(q, &mut t)?;
            let lambda_p = K0_REF / fundamental_root(&systems[0], K0_REF)?.kz;
            t.meta_num("result_plasmon_wavelength", lambda_p);
            let cases: Vec<(usize, u32)> = (0..systems.len()).flat_map(|i| (0..=a.m_max).map(move |m| (i, m))).collect();
            let rows: Vec<Vec<Cell>> = cases
                .par_iter()
                .map(|&(i, m)| {
                    let d = (m as f64 + 0.5) * lambda_p;
                    let s = gamma_sym_decomposition(&systems[i], &e, &e.shifted(d), &spec)?;
                    Ok(vec![
                        a.eps_im[i].into(),
                        m.into(),
                        d.into(),
                        s.gamma_s.value.into(),
                        s.gamma_s_free.value.into(),
                        s.gamma_s_wire.value.into(),
                        s.ratio().into(),
                    ])
                })
                .collect::<plasmonwire::Result<_>>()?;
            rows.into_iter().for_each(|r| t.row(r));
            Ok(t)
        }
    }
}

// ---------------------------------------------------------------- selftest

pub fn selftest() -> (Table, Out<()>) {
    let report = run_selftest();
    let mut t = Table::new(["module", "check", "passed", "detail"]);
    t.meta("command", "selftest");
    for c in &report.checks {
        t.row(vec![c.module.into(), c.name.into(), c.passed.into(), c.detail.as_str().into()]);
    }
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    let verdict = if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Invariant(format!("{failed} of {} invariants failed", report.checks.len())))
    };
    (t, verdict)
}
