//! Cylinder functions of integer order and complex argument.
//!
//! J_n and H_n^(1) are evaluated on the principal branch (cut along the
//! negative real axis). Values are delegated to a pure-Rust port of the Amos
//! algorithms; this module owns the argument checks, the error mapping and the
//! derivative recurrence Z_n' = (Z_{n-1} - Z_{n+1}) / 2, Z_0' = -Z_1.
//!
//! The `*_scaled` variants strip the exponential growth so that arguments deep
//! in the evanescent region do not overflow:
//!
//! * `bessel_j_scaled(n, z) = exp(-|Im z|) J_n(z)`
//! * `hankel1_scaled(n, z)  = exp(-i z) H_n^(1)(z)`

use complex_bessel::{self as cb, Scaling};
use num_complex::Complex64;

use crate::{Error, Result};

/// Highest harmonic order accepted by the public functions.
pub const MAX_ORDER: i32 = 64;
/// Largest accepted |z|.
pub const MAX_ABS_ARG: f64 = 1.0e4;

/// A cylinder function together with its first derivative at the same argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueDeriv {
    pub value: Complex64,
    pub deriv: Complex64,
}

#[derive(Clone, Copy)]
enum Kind {
    J,
    H1,
}

fn check_args(n: i32, z: Complex64) -> Result<()> {
    if n < 0 {
        return Err(Error::Domain(format!(
            "negative order {n}; apply the reflection Z_-n = (-1)^n Z_n at the call site"
        )));
    }
    if n > MAX_ORDER {
        return Err(Error::Domain(format!("order {n} exceeds {MAX_ORDER}")));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite argument {z}")));
    }
    if z.norm() > MAX_ABS_ARG {
        return Err(Error::Range(format!("|z| = {} exceeds {MAX_ABS_ARG}", z.norm())));
    }
    Ok(())
}

fn map_err(kind: Kind, n: i32, z: Complex64, e: cb::Error) -> Error {
    let name = match kind {
        Kind::J => "J",
        Kind::H1 => "H1",
    };
    match e {
        cb::Error::Overflow => Error::Range(format!("{name}_{n}({z}) overflows")),
        cb::Error::InvalidInput => Error::Domain(format!("{name}_{n}({z}) is undefined")),
        other => Error::Convergence(format!("{name}_{n}({z}): {other}")),
    }
}

fn finite(v: Complex64, what: &str) -> Result<Complex64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::Range(format!("{what} is not finite")))
    }
}

/// Orders `first..first+count` in one call.
fn sequence(kind: Kind, first: i32, count: usize, z: Complex64, scaling: Scaling) -> Result<Vec<Complex64>> {
    if let Kind::H1 = kind {
        if z == Complex64::new(0.0, 0.0) {
            return Err(Error::Domain("H1 is singular at z = 0".into()));
        }
    }
    let nu = first as f64;
    let res = match kind {
        Kind::J => cb::besselj_seq(nu, z, count, scaling),
        Kind::H1 => cb::hankel1_seq(nu, z, count, scaling),
    }
    .map_err(|e| map_err(kind, first, z, e))?;
    // the backend flushes underflowing J values to zero; report them instead
    if let Kind::J = kind {
        if z != Complex64::new(0.0, 0.0) && res.values.iter().any(|v| *v == Complex64::new(0.0, 0.0)) {
            return Err(Error::Range(format!("J_{first}..({z}) underflows")));
        }
    }
    res.values
        .into_iter()
        .map(|v| finite(v, "cylinder function value"))
        .collect()
}

fn value_deriv(kind: Kind, n: i32, z: Complex64, scaling: Scaling) -> Result<ValueDeriv> {
    check_args(n, z)?;
    if n == 0 {
        let v = sequence(kind, 0, 2, z, scaling)?;
        Ok(ValueDeriv { value: v[0], deriv: -v[1] })
    } else {
        let v = sequence(kind, n - 1, 3, z, scaling)?;
        Ok(ValueDeriv { value: v[1], deriv: 0.5 * (v[0] - v[2]) })
    }
}

/// Bessel function of the first kind J_n(z).
pub fn bessel_j(n: i32, z: Complex64) -> Result<Complex64> {
    check_args(n, z)?;
    Ok(sequence(Kind::J, n, 1, z, Scaling::Unscaled)?[0])
}

/// Hankel function of the first kind H_n^(1)(z) = J_n(z) + i Y_n(z).
pub fn hankel1(n: i32, z: Complex64) -> Result<Complex64> {
    check_args(n, z)?;
    Ok(sequence(Kind::H1, n, 1, z, Scaling::Unscaled)?[0])
}

/// d/dz J_n(z).
pub fn bessel_j_prime(n: i32, z: Complex64) -> Result<Complex64> {
    Ok(value_deriv(Kind::J, n, z, Scaling::Unscaled)?.deriv)
}

/// d/dz H_n^(1)(z).
pub fn hankel1_prime(n: i32, z: Complex64) -> Result<Complex64> {
    Ok(value_deriv(Kind::H1, n, z, Scaling::Unscaled)?.deriv)
}

/// exp(-|Im z|) J_n(z).
pub fn bessel_j_scaled(n: i32, z: Complex64) -> Result<Complex64> {
    check_args(n, z)?;
    Ok(sequence(Kind::J, n, 1, z, Scaling::Exponential)?[0])
}

/// exp(-iz) H_n^(1)(z).
pub fn hankel1_scaled(n: i32, z: Complex64) -> Result<Complex64> {
    check_args(n, z)?;
    Ok(sequence(Kind::H1, n, 1, z, Scaling::Exponential)?[0])
}

/// J_n and J_n', both multiplied by exp(-|Im z|).
pub fn bessel_j_pair_scaled(n: i32, z: Complex64) -> Result<ValueDeriv> {
    value_deriv(Kind::J, n, z, Scaling::Exponential)
}

/// H_n^(1) and its derivative, both multiplied by exp(-iz).
pub fn hankel1_pair_scaled(n: i32, z: Complex64) -> Result<ValueDeriv> {
    value_deriv(Kind::H1, n, z, Scaling::Exponential)
}

/// Unscaled J_n and J_n'.
pub fn bessel_j_pair(n: i32, z: Complex64) -> Result<ValueDeriv> {
    value_deriv(Kind::J, n, z, Scaling::Unscaled)
}

/// Unscaled H_n^(1) and its derivative.
pub fn hankel1_pair(n: i32, z: Complex64) -> Result<ValueDeriv> {
    value_deriv(Kind::H1, n, z, Scaling::Unscaled)
}
