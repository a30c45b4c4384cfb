use memwave_core::ingham::{kernel_g, positivity_threshold, theorem_constant};
use memwave_core::modal::{equation_residual, exact_coefficients};
use memwave_core::spectrum::{exact_roots, vieta_defect};
use memwave_core::{Complex64, Error, ModelParams, SpectralBasis};
use proptest::prelude::*;

/// Admissible parameters: `b1 = x r1`, `b2 = (1 - x) r2` satisfy the
/// relaxation identity for any `x` in `(0, 1)`.
fn params() -> impl Strategy<Value = ModelParams> {
    (0.5f64..3.0, 0.02f64..2.0, 0.02f64..2.0, 0.05f64..0.95)
        .prop_filter_map("admissible", |(g, r1, r2, x)| {
            ModelParams::new(g, x * r1, (1.0 - x) * r2, r1, r2).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn roots_satisfy_vieta_and_decay(p in params(), n in 1usize..300) {
        let lambda = SpectralBasis::orthonormal(p).eigenvalue(n);
        match exact_roots(&p, lambda) {
            Ok(r) => {
                prop_assert!(vieta_defect(&p, &r) <= 1e-9, "defect {}", vieta_defect(&p, &r));
                prop_assert!(r.residual <= 1e-9);
                prop_assert!(r.omega.im > 0.0 && r.omega.re > 0.0);
                prop_assert!(r.rho < 0.0);
                let sum: f64 = r.all().iter().map(|s| s.re).sum();
                prop_assert!((sum + p.r_sum()).abs() <= 1e-9 * (1.0 + lambda.sqrt()));
            }
            // heavily damped low modes have three real roots and must say so
            Err(Error::RootClassificationFailure { .. }) => prop_assert!(lambda < 4.0 * p.r_sum().powi(2)),
            Err(e) => prop_assert!(false, "unexpected {e}"),
        }
    }

    #[test]
    fn coefficients_reproduce_data_and_equation(p in params(), n in 3usize..60, u0 in -1.0f64..1.0, u1 in -1.0f64..1.0) {
        let lambda = SpectralBasis::orthonormal(p).eigenvalue(n);
        let Ok(r) = exact_roots(&p, lambda) else { return Ok(()) };
        let c = exact_coefficients(&p, &r, u0, u1).unwrap();
        prop_assert!((c.value(&r, 0.0) - u0).abs() <= 1e-10);
        prop_assert!((c.velocity(&r, 0.0) - u1).abs() <= 1e-10 * lambda.sqrt().max(1.0));
        for t in [0.3, 2.0, 7.5] {
            let scale = lambda * (u0.abs() + u1.abs() / lambda.sqrt());
            prop_assert!(equation_residual(&p, &r, &c, t).abs() <= 1e-8 * scale.max(1e-3));
        }
    }

    #[test]
    fn coefficients_are_linear(p in params(), n in 3usize..40, a in -2.0f64..2.0, u in -1.0f64..1.0, v in -1.0f64..1.0) {
        let lambda = SpectralBasis::orthonormal(p).eigenvalue(n);
        let Ok(r) = exact_roots(&p, lambda) else { return Ok(()) };
        let x = exact_coefficients(&p, &r, u, v).unwrap();
        let y = exact_coefficients(&p, &r, a * u, a * v).unwrap();
        prop_assert!((y.amplitude - x.amplitude * a).norm() <= 1e-12 * (1.0 + x.amplitude.norm()));
        prop_assert!((y.constant - a * x.constant).abs() <= 1e-12);
        prop_assert!((y.transient - a * x.transient).abs() <= 1e-12);
    }

    #[test]
    fn projection_inverts_synthesis(coeffs in prop::collection::vec(-1.0f64..1.0, 1..16), factor in 4usize..8) {
        let basis = SpectralBasis::orthonormal(memwave_core::canonical_params());
        let m = factor * coeffs.len();
        let samples: Vec<f64> = (0..=m)
            .map(|j| basis.synthesize(&coeffs, std::f64::consts::PI * j as f64 / m as f64))
            .collect();
        let back = basis.project(&samples, coeffs.len()).unwrap();
        for (a, b) in coeffs.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn kernel_is_conjugation_symmetric(re in -50.0f64..50.0, im in -3.0f64..3.0, horizon in 1.0f64..20.0) {
        let w = Complex64::new(re, im);
        if let (Ok(a), Ok(b)) = (kernel_g(w, horizon), kernel_g(w.conj(), horizon)) {
            prop_assert!((a.norm() - b.norm()).abs() <= 1e-14 * a.norm().max(1e-300));
        }
    }

    #[test]
    fn theorem_constant_rises_then_decays_past_its_root(gap in 0.5f64..3.0, ratio in 0.0f64..0.2, eps in 0.0f64..0.3) {
        // the constant tends to 0 as T grows when alpha > 0, so it is unimodal, not monotone
        let alpha = ratio * gap;
        let Some(root) = positivity_threshold(eps, gap, alpha) else { return Ok(()) };
        prop_assert!(theorem_constant(root * 1.001, eps, gap, alpha) > 0.0);
        prop_assert!(theorem_constant(root * 0.999, eps, gap, alpha) < 0.0);
        let values: Vec<f64> = (0..400).map(|k| theorem_constant(root * (1.0 + 0.05 * k as f64), eps, gap, alpha)).collect();
        let turns = values
            .windows(3)
            .filter(|w| (w[1] - w[0]).signum() != (w[2] - w[1]).signum())
            .count();
        prop_assert!(turns <= 1);
        prop_assert!(values[1] > values[0]);
        prop_assert!(values[1..].iter().all(|v| *v > 0.0));
    }

    #[test]
    fn undamped_constant_is_monotone(gap in 0.5f64..3.0, eps in 0.0f64..0.3, k in 0usize..200) {
        let root = positivity_threshold(eps, gap, 0.0).unwrap();
        let t = root * (1.0 + 0.1 * k as f64);
        prop_assert!(theorem_constant(t * 1.01, eps, gap, 0.0) > theorem_constant(t, eps, gap, 0.0));
    }
}
