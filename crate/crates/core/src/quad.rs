//! Globally adaptive Gauss–Kronrod (7/15) quadrature for vector-valued
//! integrands, with user-supplied breakpoints.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate drops below `max(abs_tol, rel_tol * |I|)` (max-norm over the
//! components). Subintervals are reduced in a fixed order, so the result is
//! reproducible bit for bit.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::Result;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
    /// Only the first `control` components enter the error test (all when 0).
    pub control: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-6, abs_tol: 0.0, max_intervals: 2000, control: 0 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<const N: usize> {
    pub value: [f64; N],
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

pub(crate) fn max_norm<const N: usize>(v: &[f64; N]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn head_norm(v: &[f64], control: usize) -> f64 {
    let k = if control == 0 { v.len() } else { control.min(v.len()) };
    v[..k].iter().fold(0.0, |m, x| m.max(x.abs()))
}

struct Piece<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: f64,
    // insertion index, breaks ties deterministically
    seq: usize,
}

impl<const N: usize> PartialEq for Piece<N> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<const N: usize> Eq for Piece<N> {}
impl<const N: usize> PartialOrd for Piece<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Piece<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then(other.seq.cmp(&self.seq))
    }
}

fn gk15<const N: usize, F>(f: &mut F, a: f64, b: f64, control: usize) -> Result<([f64; N], f64)>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = [0.0; N];
    let mut gauss = [0.0; N];
    let fc = f(c)?;
    for i in 0..N {
        kron[i] = WGK[7] * fc[i];
        gauss[i] = WG[3] * fc[i];
    }
    for (j, &x) in XGK.iter().enumerate().take(7) {
        let f1 = f(c - h * x)?;
        let f2 = f(c + h * x)?;
        for i in 0..N {
            let s = f1[i] + f2[i];
            kron[i] += WGK[j] * s;
            if j % 2 == 1 {
                gauss[i] += WG[j / 2] * s;
            }
        }
    }
    let mut diff = [0.0; N];
    for i in 0..N {
        kron[i] *= h;
        gauss[i] *= h;
        diff[i] = kron[i] - gauss[i];
    }
    Ok((kron, head_norm(&diff, control)))
}

/// Integrate `f` over `[points[0], points[last]]`, starting from the
/// subdivision given by `points` (sorted, at least two entries).
pub fn integrate<const N: usize, F>(mut f: F, points: &[f64], opts: QuadOptions) -> Result<QuadResult<N>>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    assert!(points.len() >= 2, "need at least one interval");
    let mut heap = BinaryHeap::new();
    let mut seq = 0;
    let mut evaluations = 0;
    let mut total = [0.0; N];
    let mut total_err = 0.0;
    for w in points.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (value, error) = gk15(&mut f, w[0], w[1], opts.control)?;
        evaluations += 15;
        for i in 0..N {
            total[i] += value[i];
        }
        total_err += error;
        heap.push(Piece { a: w[0], b: w[1], value, error, seq });
        seq += 1;
    }
    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * head_norm(&total, opts.control));
        if total_err <= tol || heap.is_empty() {
            break;
        }
        if heap.len() >= opts.max_intervals {
            return Ok(QuadResult { value: sum_pieces(&heap), error: total_err, evaluations, converged: false });
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine resolution
            heap.push(worst);
            return Ok(QuadResult { value: sum_pieces(&heap), error: total_err, evaluations, converged: false });
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid, opts.control)?;
        let (v2, e2) = gk15(&mut f, mid, worst.b, opts.control)?;
        evaluations += 30;
        for i in 0..N {
            total[i] += v1[i] + v2[i] - worst.value[i];
        }
        total_err += e1 + e2 - worst.error;
        heap.push(Piece { a: worst.a, b: mid, value: v1, error: e1, seq });
        heap.push(Piece { a: mid, b: worst.b, value: v2, error: e2, seq: seq + 1 });
        seq += 2;
    }
    // re-sum in interval order so the rounding does not depend on the refinement path
    Ok(QuadResult { value: sum_pieces(&heap), error: heap.iter().map(|p| p.error).sum(), evaluations, converged: true })
}

fn sum_pieces<const N: usize>(heap: &BinaryHeap<Piece<N>>) -> [f64; N] {
    let mut pieces: Vec<&Piece<N>> = heap.iter().collect();
    pieces.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut out = [0.0; N];
    for p in pieces {
        for i in 0..N {
            out[i] += p.value[i];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| Ok([x.powi(5) - 2.0 * x]), &[0.0, 2.0], QuadOptions::default()).unwrap();
        assert!((r.value[0] - (64.0 / 6.0 - 4.0)).abs() < 1e-13);
    }

    #[test]
    fn narrow_lorentzian_with_breakpoints() {
        let w = 1e-4;
        let c = 3.0;
        let f = |x: f64| Ok([w / ((x - c).powi(2) + w * w)]);
        let exact = ((10.0 - c) / w).atan() - ((0.0 - c) / w).atan();
        let pts = [0.0, c - 10.0 * w, c - w, c, c + w, c + 10.0 * w, 10.0];
        let r = integrate(f, &pts, QuadOptions { rel_tol: 1e-10, ..Default::default() }).unwrap();
        assert!(r.converged);
        assert!((r.value[0] - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn vector_components_and_log_singularity() {
        let r = integrate(|x: f64| Ok([x.ln(), x.sqrt()]), &[0.0, 1.0], QuadOptions { rel_tol: 1e-10, ..Default::default() }).unwrap();
        assert!((r.value[0] + 1.0).abs() < 1e-9);
        assert!((r.value[1] - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn error_control_on_leading_components() {
        // the second component is not resolved, but it is not controlled either
        let opts = QuadOptions { rel_tol: 1e-10, max_intervals: 50, control: 1, ..Default::default() };
        let r = integrate(|x: f64| Ok([x * x, (1.0 / x).sin()]), &[1e-6, 1.0], opts).unwrap();
        assert!(r.converged);
        assert!((r.value[0] - 1.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn reports_non_convergence() {
        let r = integrate(|x: f64| Ok([(1.0 / x).sin()]), &[1e-9, 1.0], QuadOptions { rel_tol: 1e-14, abs_tol: 0.0, max_intervals: 20, control: 0 }).unwrap();
        assert!(!r.converged);
    }
}
