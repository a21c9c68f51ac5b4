use hermite_mz::interpolation::WeightedPolyEval;
use hermite_mz::quadrature::build_rule;
use hermite_mz::space::{lq_norm, norm_x, weighted_lp_norm, Decay, FunctionHandle, NormSpec, VectorValue};
use hermite_mz::Error;
use proptest::prelude::*;

fn random_poly(d: usize, coeffs: &[f64]) -> FunctionHandle {
    WeightedPolyEval::from_coefficients(d, coeffs.to_vec()).unwrap().to_handle()
}

#[test]
fn spec_rejects_bad_exponents() {
    assert!(matches!(NormSpec::new(0, 2.0, 2.0), Err(Error::Domain(_))));
    assert!(matches!(NormSpec::new(2, 0.5, 2.0), Err(Error::Domain(_))));
    assert!(matches!(NormSpec::new(2, 2.0, f64::NAN), Err(Error::Domain(_))));
    assert_eq!(NormSpec::scalar(4.0).unwrap().dual_exponent(), 4.0 / 3.0);
}

#[test]
fn norm_x_checks_dimension() {
    let v = VectorValue(vec![1.0, -2.0, 2.0]);
    assert_eq!(norm_x(&v, &NormSpec::new(3, 1.0, 2.0).unwrap()).unwrap(), 5.0);
    assert_eq!(norm_x(&v, &NormSpec::new(3, f64::INFINITY, 2.0).unwrap()).unwrap(), 2.0);
    assert!(matches!(norm_x(&v, &NormSpec::new(2, 2.0, 2.0).unwrap()), Err(Error::Shape { .. })));
}

#[test]
fn unknown_decay_is_refused() {
    let g = FunctionHandle::scalar(Decay::Unknown, |t| t.cos());
    assert!(matches!(weighted_lp_norm(&g, &NormSpec::scalar(2.0).unwrap(), 8), Err(Error::Usage(_))));
}

#[test]
fn algebraic_profile_norm() {
    // ∫ (1+t²)^{-1} dt = π, so the L_1 norm is π and the L_2 norm is √(π/2).
    let g = FunctionHandle::scalar(Decay::Algebraic, |t| 1.0 / (1.0 + t * t));
    let l1 = weighted_lp_norm(&g, &NormSpec::scalar(1.0).unwrap(), 8).unwrap();
    assert!((l1 - std::f64::consts::PI).abs() < 1e-9, "{l1}");
    let l2 = weighted_lp_norm(&g, &NormSpec::scalar(2.0).unwrap(), 8).unwrap();
    assert!((l2 - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-9, "{l2}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lq_norm_is_monotone_in_q(v in prop::collection::vec(-10.0f64..10.0, 1..12), q1 in 1.0f64..6.0, dq in 0.0f64..6.0) {
        let a = lq_norm(&v, q1);
        let b = lq_norm(&v, q1 + dq);
        let c = lq_norm(&v, f64::INFINITY);
        prop_assert!(b <= a * (1.0 + 1e-14));
        prop_assert!(c <= b * (1.0 + 1e-14));
    }

    #[test]
    fn lq_triangle(u in prop::collection::vec(-5.0f64..5.0, 6), v in prop::collection::vec(-5.0f64..5.0, 6), q in 1.0f64..10.0) {
        let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        prop_assert!(lq_norm(&w, q) <= (lq_norm(&u, q) + lq_norm(&v, q)) * (1.0 + 1e-14));
    }

    /// ‖s g‖ = |s| ‖g‖ and the norm decreases as q grows.
    #[test]
    fn weighted_norm_homogeneous_and_monotone(
        n in 0usize..12,
        coeffs in prop::collection::vec(-1.0f64..1.0, 13 * 2),
        s in -3.0f64..3.0,
        p in 1.0f64..5.0,
    ) {
        let g = random_poly(2, &coeffs[..(n + 1) * 2]);
        let spec = NormSpec::new(2, 2.0, p).unwrap();
        let base = weighted_lp_norm(&g, &spec, n).unwrap();
        let scaled = weighted_lp_norm(&g.scaled(s), &spec, n).unwrap();
        prop_assert!((scaled - s.abs() * base).abs() <= 1e-9 * base.max(1e-12));
        let q1 = weighted_lp_norm(&g, &NormSpec::new(2, 1.0, p).unwrap(), n).unwrap();
        let qi = weighted_lp_norm(&g, &NormSpec::new(2, f64::INFINITY, p).unwrap(), n).unwrap();
        prop_assert!(base <= q1 * (1.0 + 1e-9));
        prop_assert!(qi <= base * (1.0 + 1e-9));
    }

    /// Continuous Parseval: ‖Σ c_k ℋ_k‖_2 = ‖c‖_2.
    #[test]
    fn continuous_parseval(n in 0usize..30, coeffs in prop::collection::vec(-1.0f64..1.0, 31)) {
        let c = &coeffs[..=n];
        let g = random_poly(1, c);
        let got = weighted_lp_norm(&g, &NormSpec::scalar(2.0).unwrap(), n).unwrap();
        let want = lq_norm(c, 2.0);
        prop_assert!((got - want).abs() <= 1e-9 * want.max(1e-12), "{} vs {}", got, want);
    }
}

#[test]
fn rule_hint_does_not_change_the_value() {
    let g = random_poly(1, &[0.3, -0.2, 0.5, 0.1]);
    let spec = NormSpec::scalar(3.0).unwrap();
    let a = weighted_lp_norm(&g, &spec, 3).unwrap();
    let b = weighted_lp_norm(&g, &spec, 20).unwrap();
    assert!((a - b).abs() < 1e-10 * a);
    assert_eq!(build_rule(3).unwrap().len(), 4);
}
