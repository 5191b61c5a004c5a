use thiserror::Error;

/// Errors raised by the numerical layers of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of a function (e.g. a Hankel function at z = 0).
    #[error("domain error: {0}")]
    Domain(String),
    /// Result not representable in double precision, or argument beyond the supported range.
    #[error("range error: {0}")]
    Range(String),
    /// The boundary system is numerically singular; `kz` sits on (or next to) a lossless mode pole.
    #[error("boundary system near-singular at n = {n}, k_z = {kz}: condition number {cond:.3e}")]
    NearPole { n: u32, kz: f64, cond: f64 },
    /// A documented precondition of the operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Quadrature, series or iteration failed to reach its tolerance.
    #[error("convergence failure: {0}")]
    Convergence(String),
    /// A sampled resonance does not contain a resolved peak.
    #[error("unresolved resonance: {0}")]
    Resolution(String),
}

pub type Result<T> = std::result::Result<T, Error>;
