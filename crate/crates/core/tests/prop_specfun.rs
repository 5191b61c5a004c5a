use num_complex::Complex64;
use plasmonwire::specfun::{bessel_j, hankel1};
use proptest::prelude::*;

fn arg() -> impl Strategy<Value = Complex64> {
    // 0.1 ≤ |z| ≤ 100, 0 ≤ arg z ≤ π/4, log-uniform in modulus
    ((0.1f64).ln()..(100.0f64).ln(), 0.0..std::f64::consts::FRAC_PI_4).prop_map(|(lm, a)| Complex64::from_polar(lm.exp(), a))
}

proptest! {
    #[test]
    fn wronskian(z in arg(), n in 0i32..=10) {
        // J_{n+1}Y_n − J_nY_{n+1} with Y = −i(H − J); the J·J terms cancel identically
        let w = Complex64::new(0.0, -1.0) * (bessel_j(n + 1, z).unwrap() * hankel1(n, z).unwrap() - bessel_j(n, z).unwrap() * hankel1(n + 1, z).unwrap());
        let exact = 2.0 / (std::f64::consts::PI * z);
        prop_assert!((w - exact).norm() <= 1e-10 * exact.norm(), "z={z} n={n}: {w} vs {exact}");
    }

    #[test]
    fn recurrence(z in arg(), n in 1i32..=20) {
        for f in [bessel_j, hankel1] {
            let (a, b, m) = (f(n - 1, z).unwrap(), f(n + 1, z).unwrap(), f(n, z).unwrap());
            let t = m * 2.0 * n as f64 / z;
            let scale = a.norm() + b.norm() + t.norm();
            prop_assert!((a + b - t).norm() <= 1e-9 * scale, "z={z} n={n}");
        }
    }

    #[test]
    fn bessel_ode(z in arg(), n in 2i32..=12) {
        for f in [bessel_j, hankel1] {
            let v = |k: i32| f(k, z).unwrap();
            let d1 = (v(n - 1) - v(n + 1)) * 0.5;
            let d2 = (v(n - 2) - v(n) * 2.0 + v(n + 2)) * 0.25;
            let terms = [z * z * d2, z * d1, (z * z - (n * n) as f64) * v(n)];
            let scale: f64 = terms.iter().map(|t| t.norm()).sum();
            let res = terms.iter().sum::<Complex64>().norm();
            prop_assert!(res <= 1e-6 * scale, "z={z} n={n}: {res:e} of {scale:e}");
        }
    }
}
