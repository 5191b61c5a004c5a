//! One-dimensional maximization (a coarse scan to bracket the global maximum,
//! then golden-section refinement) and bracketed root finding.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    /// True when the maximum sits on an end of the search interval.
    pub at_boundary: bool,
}

/// Golden-section search for a maximum of a unimodal `f` on `[a, b]`.
pub fn golden_max<F>(mut f: F, mut a: f64, mut b: f64, xtol: f64) -> Result<Maximum>
where
    F: FnMut(f64) -> Result<f64>,
{
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..200 {
        if (b - a).abs() <= xtol {
            break;
        }
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2)?;
        }
    }
    let (x, value) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    Ok(Maximum { x, value, at_boundary: false })
}

/// Scan `grid` (sorted, at least three points), then refine around the best
/// sample. The maximum is flagged `at_boundary` when the best sample is an end
/// point.
pub fn scan_then_golden<F>(mut f: F, grid: &[f64], xtol: f64) -> Result<Maximum>
where
    F: FnMut(f64) -> Result<f64>,
{
    if grid.len() < 3 {
        return Err(Error::Precondition("scan grid needs at least three points".into()));
    }
    let mut values = Vec::with_capacity(grid.len());
    for &x in grid {
        values.push(f(x)?);
    }
    let best = values
        .iter()
        .enumerate()
        .fold(0, |b, (i, v)| if *v > values[b] { i } else { b });
    if best == 0 || best == grid.len() - 1 {
        return Ok(Maximum { x: grid[best], value: values[best], at_boundary: true });
    }
    let m = golden_max(&mut f, grid[best - 1], grid[best + 1], xtol)?;
    if m.value >= values[best] {
        Ok(m)
    } else {
        Ok(Maximum { x: grid[best], value: values[best], at_boundary: false })
    }
}

/// Log-spaced grid of `count` points on `[a, b]`, `0 < a < b`.
pub fn log_grid(a: f64, b: f64, count: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    (0..count)
        .map(|i| (la + (lb - la) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Linear grid of `count` points on `[a, b]`.
pub fn lin_grid(a: f64, b: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| a + (b - a) * i as f64 / (count - 1) as f64).collect()
}

/// Brent's method for a root of `f` in `[a, b]`, where `f(a)` and `f(b)` have
/// opposite signs. Stops when the bracket is below `xtol`.
pub fn brent_root<F>(mut f: F, mut a: f64, mut b: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Precondition(format!("root not bracketed in [{a}, {b}]")));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Err(Error::Convergence(format!("root search did not converge near {b}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_peak() {
        let m = golden_max(|x| Ok(-(x - 0.3).powi(2)), -1.0, 2.0, 1e-10).unwrap();
        assert!((m.x - 0.3).abs() < 1e-8);
    }

    #[test]
    fn scan_picks_global_peak() {
        let f = |x: f64| Ok((-(x - 4.0).powi(2)).exp() + 0.5 * (-(x - 1.0).powi(2)).exp());
        let m = scan_then_golden(f, &lin_grid(0.0, 6.0, 25), 1e-9).unwrap();
        assert!((m.x - 4.0).abs() < 1e-3);
        assert!(!m.at_boundary);
    }

    #[test]
    fn flags_boundary() {
        let m = scan_then_golden(|x| Ok(x), &lin_grid(0.0, 1.0, 5), 1e-9).unwrap();
        assert!(m.at_boundary);
        assert_eq!(m.x, 1.0);
    }

    #[test]
    fn brent_finds_cubic_root() {
        let x = brent_root(|x| Ok(x * x * x - 2.0), 0.0, 3.0, 1e-14).unwrap();
        assert!((x - 2f64.cbrt()).abs() < 1e-13);
        assert!(brent_root(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn log_grid_ends() {
        let g = log_grid(0.01, 10.0, 7);
        assert!((g[0] - 0.01).abs() < 1e-15 && (g[6] - 10.0).abs() < 1e-12);
    }
}
