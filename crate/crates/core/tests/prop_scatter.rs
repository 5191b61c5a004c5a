use num_complex::Complex64;
use plasmonwire::dispersion::{mode_roots, DEFAULT_SEARCH_MAX};
use plasmonwire::scatter::{boundary_matrix, boundary_residual, mode_determinant, solve_coeffs, WireSystem};
use plasmonwire::{Error, K0_REF};
use proptest::prelude::*;

fn wires() -> impl Strategy<Value = WireSystem> {
    ((0.005f64).ln()..(0.5f64).ln(), -100.0..-2.0f64, 0.05..2.0f64)
        .prop_map(|(lr, re, im)| WireSystem::new(lr.exp(), Complex64::new(re, im)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn solved_coefficients_satisfy_the_boundary(sys in wires(), n in 0u32..8, kz in 0.0..6.0f64) {
        let kz = Complex64::new(kz * K0_REF, 0.0);
        match solve_coeffs(&sys, n, kz, K0_REF) {
            Ok(c) => {
                let res = boundary_residual(&sys, n, kz, K0_REF, &c).unwrap();
                prop_assert!(res < 1e-9, "residual {res:e}");
            }
            Err(Error::NearPole { .. }) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn order_zero_blocks_decouple(sys in wires(), kz in 0.0..6.0f64) {
        let bs = boundary_matrix(&sys, 0, Complex64::new(kz * K0_REF, 0.0), K0_REF).unwrap();
        let (te, tm) = ([0usize, 2, 5, 7], [1usize, 3, 4, 6]);
        let (te_rows, tm_rows) = ([0usize, 3, 4, 7], [1usize, 2, 5, 6]);
        let scale = bs.matrix.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (rows, cols) in [(te_rows, tm), (tm_rows, te)] {
            for &i in &rows {
                for &j in &cols {
                    prop_assert!(bs.matrix[(i, j)].norm() < 1e-12 * scale);
                }
            }
        }
    }

    #[test]
    fn determinant_zeros_are_mode_roots(lr in (0.005f64).ln()..(1.5f64).ln(), eps in -100.0..-5.0f64, n in 0u32..3) {
        let sys = WireSystem::new(lr.exp(), Complex64::new(eps, 0.0)).unwrap();
        for root in mode_roots(&sys, n, K0_REF, DEFAULT_SEARCH_MAX).unwrap() {
            // a root accurate to 1e-10 leaves |det| at most 1e-3 of its value 1e-7 away
            let det = |kz: f64| mode_determinant(&sys, n, Complex64::new(kz, 0.0), K0_REF).unwrap().norm();
            let off = det(root.kz * (1.0 + 1e-7)).min(det(root.kz * (1.0 - 1e-7)));
            prop_assert!(det(root.kz) <= 1e-3 * off, "n={n} kz={}: {:e} vs {:e}", root.kz, det(root.kz), off);
        }
    }
}
