use etadist::arith::PrimePowerTable;
use etadist::cumulant::{log_mgf_local, CumulantEngine};
use etadist::specfun::{bessel_i0, lambda_zeros, smoothed_indicator, BSParams};
use etadist::zeta_line::{dirichlet_poly, RectangleFamily};
use etadist::ModelPoint;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use std::sync::OnceLock;

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 97, 1009, 65_537];

fn table() -> &'static PrimePowerTable {
    static T: OnceLock<PrimePowerTable> = OnceLock::new();
    T.get_or_init(|| PrimePowerTable::up_to(500.0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mgf_positive_on_real_axis(s in 0.55f64..1.5, m in 0u32..3, alpha in 0.0f64..6.3, pi in 0usize..8, kappa in -50.0f64..1e5) {
        let mp = ModelPoint::new(s, m, alpha).unwrap();
        let v = log_mgf_local(&mp, PRIMES[pi], C64::new(kappa, 0.0)).unwrap();
        prop_assert!(v.re.is_finite());
        prop_assert!(v.im.abs() < 1e-9 * v.re.abs().max(1.0));
    }

    #[test]
    fn dirichlet_poly_conjugation(s in 0.5f64..1.5, m in 0u32..3, t in 0.0f64..1e6) {
        let mp = ModelPoint::new(s, m, 0.0).unwrap();
        let a = dirichlet_poly(&mp, table(), t);
        let b = dirichlet_poly(&mp, table(), -t);
        prop_assert!((a - b.conj()).norm() <= 1e-13 * a.norm().max(1.0));
    }

    #[test]
    fn two_zeros_and_max_at_first(r in 0.01f64..0.7071, alpha in 0.0f64..6.3, m in 0u32..4) {
        let z = lambda_zeros(r, m, alpha).unwrap();
        prop_assert!(z.lambda_dd_at_theta1 < 0.0);
        prop_assert!(z.theta1 >= 0.0 && z.theta1 < std::f64::consts::TAU);
        prop_assert!(z.theta2 > z.theta1 && z.theta2 < z.theta1 + std::f64::consts::TAU);
    }

    #[test]
    fn bessel_conjugate_symmetry(re in 0.0f64..25.0, im in -25.0f64..25.0) {
        let z = C64::new(re, im);
        let a = bessel_i0(z).unwrap();
        prop_assert!((a.conj() - bessel_i0(z.conj()).unwrap()).norm() <= 1e-12 * a.norm());
    }

    #[test]
    fn smoothed_indicator_converges_inside(x in -0.8f64..0.8, l in 20.0f64..200.0) {
        let bs = BSParams::new(l, -1.0, 1.0).unwrap();
        let v = smoothed_indicator(x, &bs).unwrap();
        prop_assert!((v - 1.0).abs() < 0.05);
    }

    #[test]
    fn default_family_inside_box(log_t in 16.0f64..40.0, n in 2usize..30, cap in 1usize..2000) {
        let f = RectangleFamily::default_for(log_t.exp(), n, cap).unwrap();
        let l = f.half_width + 1e-12;
        prop_assert!(f.rectangles.len() <= cap);
        for r in &f.rectangles {
            prop_assert!(-l <= r.c1 && r.c1 < r.d1 && r.d1 <= l);
            prop_assert!(-l <= r.c2 && r.c2 < r.d2 && r.d2 <= l);
        }
    }
}

fn engine() -> &'static CumulantEngine {
    static E: OnceLock<CumulantEngine> = OnceLock::new();
    E.get_or_init(|| CumulantEngine::with_table(&ModelPoint::new(0.75, 0, 0.0).unwrap(), 10_000).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn cumulant_is_convex(k in 0.5f64..300.0) {
        let h = 1e-2 * k;
        let f = |x: f64| engine().eval(x, 1e-6).unwrap();
        let (a, b, c) = (f(k - h), f(k), f(k + h));
        prop_assert!(b.f2 > 0.0);
        prop_assert!(a.f1 <= b.f1 && b.f1 <= c.f1);
        prop_assert!(a.f + c.f - 2.0 * b.f >= -1e-9 * b.f.abs().max(1.0));
    }
}
