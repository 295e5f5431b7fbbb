use proptest::prelude::*;

use robust_mimo::linalg::random::{random_complex_matrix, seeded_rng};
use robust_mimo::linalg::svd;
use robust_mimo::worstcase::{secular_solve, worst_case_error_general, DesignProblem};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn svd_reconstructs(seed in any::<u64>(), m in 1usize..6, n in 1usize..6) {
        let a = random_complex_matrix(m, n, &mut seeded_rng(seed));
        let f = svd(&a).unwrap();
        let err = f.reconstruct().sub(&a).unwrap().frobenius_norm();
        prop_assert!(err <= 1e-12 * a.frobenius_norm().max(1.0), "reconstruction error {err:e}");
        prop_assert!(f.sigma.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(f.sigma.iter().all(|&s| s >= 0.0));
    }

    #[test]
    fn secular_root_satisfies_equation(
        lambdas in prop::collection::vec(-5.0f64..5.0, 1..6),
        scale in prop::collection::vec(0.1f64..3.0, 6),
        eps in 0.05f64..2.0,
    ) {
        let coeffs: Vec<f64> = lambdas.iter().zip(&scale).map(|(_, s)| *s).collect();
        let root = secular_solve(&lambdas, &coeffs, eps).unwrap();
        prop_assert!(!root.hard_case);
        prop_assert!(root.gap > 0.0);
        let lhs: f64 = lambdas.iter().zip(&coeffs).map(|(&l, &c)| (c / root.denominator(l)).powi(2)).sum();
        prop_assert!((lhs - eps * eps).abs() <= 1e-10 * eps * eps, "lhs {lhs} vs {}", eps * eps);
    }

    #[test]
    fn worst_case_grows_with_radius(seed in any::<u64>(), eps in 0.0f64..1.0, extra in 0.0f64..1.0) {
        let mut rng = seeded_rng(seed);
        let h = random_complex_matrix(3, 2, &mut rng);
        let f = random_complex_matrix(2, 2, &mut rng);
        let g = random_complex_matrix(2, 3, &mut rng);
        let at = |e: f64| {
            let p = DesignProblem { h_tilde: h.clone(), epsilon: e, noise_var: 1.0, power: 1.0, streams: 2 };
            worst_case_error_general(&f, &g, &p).unwrap().mse_value
        };
        let small = at(eps);
        let large = at(eps + extra);
        prop_assert!(large >= small - 1e-9 * small.max(1.0), "{large} < {small}");
    }
}
