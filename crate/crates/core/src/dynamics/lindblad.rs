//! Lindblad master equation
//!
//! ```text
//! dρ/dt = −i[H, ρ] + Σ_k γ_k (L_k ρ L_k† − ½{L_k† L_k, ρ})
//! ```
//!
//! integrated with an adaptive Dormand–Prince 5(4) pair on the full matrix.
//! The trace is not renormalized between steps; its drift is reported.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(pub CMatrix);

impl DensityMatrix {
    /// Checks hermiticity (1e-12), unit trace (1e-9) and positivity (−1e-9).
    pub fn new(m: CMatrix) -> Result<Self> {
        let rho = Self(m);
        rho.validate()?;
        Ok(rho)
    }

    /// |ψ⟩⟨ψ| for a normalized copy of `psi`.
    pub fn pure(psi: &DVector<Complex64>) -> Result<Self> {
        let norm = psi.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Precondition("state vector has zero norm".into()));
        }
        let v = psi / Complex64::from(norm);
        Ok(Self(&v * v.adjoint()))
    }

    /// Diagonal density matrix from populations (must sum to one).
    pub fn diagonal(populations: &[f64]) -> Result<Self> {
        let m = CMatrix::from_diagonal(&DVector::from_iterator(populations.len(), populations.iter().map(|&p| Complex64::from(p))));
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.0 - self.0.adjoint()).iter().fold(0.0_f64, |a, z| a.max(z.norm()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.0 + self.0.adjoint()) * Complex64::from(0.5);
        SymmetricEigen::new(h).eigenvalues.iter().fold(f64::INFINITY, |a, &x| a.min(x))
    }

    /// ⟨ψ|ρ|ψ⟩ for a normalized `psi`.
    pub fn expectation(&self, psi: &DVector<Complex64>) -> f64 {
        (psi.adjoint() * &self.0 * psi)[(0, 0)].re / psi.norm_squared()
    }

    pub fn population(&self, i: usize) -> f64 {
        self.0[(i, i)].re
    }

    pub fn validate(&self) -> Result<()> {
        if !self.0.is_square() || self.0.nrows() == 0 {
            return Err(Error::Precondition("density matrix must be square".into()));
        }
        if self.hermiticity_error() > 1e-12 {
            return Err(Error::Precondition(format!("density matrix not Hermitian ({:.3e})", self.hermiticity_error())));
        }
        if (self.trace() - 1.0).abs() > 1e-9 {
            return Err(Error::Precondition(format!("density matrix trace {} is not 1", self.trace())));
        }
        let lmin = self.min_eigenvalue();
        if lmin < -1e-9 {
            return Err(Error::Precondition(format!("density matrix has eigenvalue {lmin:.3e}")));
        }
        Ok(())
    }
}

/// A jump operator with its rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Jump {
    pub op: CMatrix,
    pub rate: f64,
}

/// Step-size control of the integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    /// Allowed local error per unit time (max-norm of the matrix).
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { tol: 1e-9, max_steps: 2_000_000 }
    }
}

/// Final state of an evolution with integrator statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub rho: DensityMatrix,
    pub steps: usize,
    pub rejected: usize,
    /// |tr ρ(t) − tr ρ(0)|
    pub trace_drift: f64,
}

/// Right-hand side dρ/dt = −i(H_eff ρ − ρ H_eff†) + Σ γ L ρ L†.
struct Generator {
    heff: CMatrix,
    heff_adj: CMatrix,
    // (L, L†) pairs with the rate folded in
    recycle: Vec<(CMatrix, CMatrix)>,
}

impl Generator {
    fn apply(&self, rho: &CMatrix) -> CMatrix {
        let mut out = (&self.heff * rho - rho * &self.heff_adj) * (-I);
        for (l, ld) in &self.recycle {
            out += l * rho * ld;
        }
        out
    }
}

fn check_operator(m: &CMatrix, d: usize, what: &str) -> Result<()> {
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::Precondition(format!("{what} is {}×{}, expected {d}×{d}", m.nrows(), m.ncols())));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Precondition(format!("{what} has non-finite entries")));
    }
    Ok(())
}

fn check_hamiltonian(h: &CMatrix, d: usize) -> Result<()> {
    check_operator(h, d, "Hamiltonian")?;
    let herr = (h - h.adjoint()).iter().fold(0.0_f64, |a, z| a.max(z.norm()));
    if herr > 1e-12 * h.iter().fold(1.0_f64, |a, z| a.max(z.norm())) {
        return Err(Error::Precondition(format!("Hamiltonian not Hermitian ({herr:.3e})")));
    }
    Ok(())
}

/// Evolve `rho0` for time `t` under `h` and independent jump channels.
pub fn lindblad_evolve(h: &CMatrix, jumps: &[Jump], rho0: &DensityMatrix, t: f64, ctl: StepControl) -> Result<Evolution> {
    let d = rho0.dim();
    check_hamiltonian(h, d)?;
    let mut heff = h.clone();
    let mut recycle = Vec::new();
    for (k, j) in jumps.iter().enumerate() {
        check_operator(&j.op, d, &format!("jump operator {k}"))?;
        if !(j.rate >= 0.0 && j.rate.is_finite()) {
            return Err(Error::Precondition(format!("jump channel {k} has rate {}; rates must be nonnegative", j.rate)));
        }
        if j.rate == 0.0 {
            continue;
        }
        let ld = j.op.adjoint();
        heff -= (&ld * &j.op) * Complex64::new(0.0, 0.5 * j.rate);
        recycle.push((&j.op * Complex64::from(j.rate), ld));
    }
    let heff_adj = heff.adjoint();
    run(&Generator { heff, heff_adj, recycle }, rho0, t, ctl)
}

/// Evolve with correlated decay Σ_kl Γ_kl (L_k ρ L_l† − ½{L_l† L_k, ρ}), the
/// form with cross rates between emitters. `gamma` must be real symmetric
/// positive semidefinite.
pub fn lindblad_evolve_correlated(
    h: &CMatrix,
    ops: &[CMatrix],
    gamma: &DMatrix<f64>,
    rho0: &DensityMatrix,
    t: f64,
    ctl: StepControl,
) -> Result<Evolution> {
    let d = rho0.dim();
    check_hamiltonian(h, d)?;
    let m = ops.len();
    if gamma.nrows() != m || gamma.ncols() != m {
        return Err(Error::Precondition(format!("rate matrix must be {m}×{m}")));
    }
    check_rate_matrix(gamma)?;
    let mut heff = h.clone();
    let mut recycle = Vec::new();
    for k in 0..m {
        check_operator(&ops[k], d, &format!("jump operator {k}"))?;
        for l in 0..m {
            let g = gamma[(k, l)];
            if g == 0.0 {
                continue;
            }
            let ld = ops[l].adjoint();
            heff -= (&ld * &ops[k]) * Complex64::new(0.0, 0.5 * g);
            recycle.push((&ops[k] * Complex64::from(g), ld));
        }
    }
    let heff_adj = heff.adjoint();
    run(&Generator { heff, heff_adj, recycle }, rho0, t, ctl)
}

fn check_rate_matrix(gamma: &DMatrix<f64>) -> Result<()> {
    let asym = (gamma - gamma.transpose()).amax();
    if asym > 1e-12 * gamma.amax().max(1.0) {
        return Err(Error::Precondition("rate matrix must be symmetric".into()));
    }
    let eig = SymmetricEigen::new(gamma.clone());
    let scale = gamma.amax().max(f64::MIN_POSITIVE);
    if let Some(&lmin) = eig.eigenvalues.iter().find(|&&x| x < -1e-12 * scale) {
        return Err(Error::Precondition(format!("rate matrix has negative channel rate {lmin:.6e}")));
    }
    Ok(())
}

/// Diagonalize the rate matrix into independent channels L'_j = Σ_k v_kj L_k
/// with the eigenvalues as rates.
pub fn collective_channels(ops: &[CMatrix], gamma: &DMatrix<f64>) -> Result<Vec<Jump>> {
    if gamma.nrows() != ops.len() || gamma.ncols() != ops.len() {
        return Err(Error::Precondition(format!("rate matrix must be {0}×{0}", ops.len())));
    }
    check_rate_matrix(gamma)?;
    let eig = SymmetricEigen::new(gamma.clone());
    Ok((0..ops.len())
        .map(|j| {
            let op = ops.iter().enumerate().fold(CMatrix::zeros(ops[0].nrows(), ops[0].ncols()), |acc, (k, l)| {
                acc + l * Complex64::from(eig.eigenvectors[(k, j)])
            });
            Jump { op, rate: eig.eigenvalues[j].max(0.0) }
        })
        .collect())
}

// Dormand–Prince 5(4) tableau; the generator is autonomous, so the nodes are not needed
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights are the last row of A; these are fifth minus fourth
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn run(g: &Generator, rho0: &DensityMatrix, t: f64, ctl: StepControl) -> Result<Evolution> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Precondition(format!("evolution time {t} must be nonnegative")));
    }
    if !(ctl.tol > 0.0) {
        return Err(Error::Precondition("step tolerance must be positive".into()));
    }
    let tr0 = rho0.trace();
    let mut rho = rho0.0.clone();
    let mut time = 0.0;
    let mut k1 = g.apply(&rho);
    // initial step from the generator's scale
    let rate = k1.iter().fold(0.0_f64, |a, z| a.max(z.norm())) / rho.iter().fold(f64::MIN_POSITIVE, |a, z| a.max(z.norm()));
    let mut h = if rate > 0.0 { (0.1 / rate).min(t) } else { t };
    let (mut steps, mut rejected) = (0, 0);
    while time < t {
        if steps + rejected >= ctl.max_steps {
            return Err(Error::Convergence(format!("Lindblad integration exceeded {} steps at t = {time:.6e} of {t:.6e}", ctl.max_steps)));
        }
        let last = time + h >= t * (1.0 - 1e-14);
        if last {
            h = t - time;
        }
        let mut k: Vec<CMatrix> = Vec::with_capacity(7);
        k.push(k1.clone());
        let mut y = rho.clone();
        for s in 1..7 {
            y.copy_from(&rho);
            for (j, kj) in k.iter().enumerate() {
                if A[s][j] != 0.0 {
                    y += kj * Complex64::from(h * A[s][j]);
                }
            }
            k.push(g.apply(&y));
        }
        // y is the fifth-order solution, k[6] the derivative there
        let mut err = CMatrix::zeros(rho.nrows(), rho.ncols());
        for (j, kj) in k.iter().enumerate() {
            if E[j] != 0.0 {
                err += kj * Complex64::from(h * E[j]);
            }
        }
        let en = err.iter().fold(0.0_f64, |a, z| a.max(z.norm()));
        let target = ctl.tol * h;
        if en <= target {
            time = if last { t } else { time + h };
            rho = y;
            k1 = k.pop().expect("seven stages");
            steps += 1;
        } else {
            rejected += 1;
        }
        let fac = if en == 0.0 { 5.0 } else { (0.9 * (target / en).powf(0.25)).clamp(0.2, 5.0) };
        h *= fac;
        if !(h > 1e-15 * t.max(1.0)) {
            return Err(Error::Convergence(format!("Lindblad step size underflow at t = {time:.6e}")));
        }
    }
    let out = DensityMatrix(rho);
    let trace_drift = (out.trace() - tr0).abs();
    Ok(Evolution { rho: out, steps, rejected, trace_drift })
}
