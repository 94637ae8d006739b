use gammalab_core::potential::{
    make_asymmetric, make_degenerate, make_quartic, make_skewed, validate_potential, ValidationTolerances,
};
use proptest::prelude::*;

#[test]
fn builtins_are_nonnegative_with_zeros_only_at_wells() {
    let pots = [
        make_quartic(),
        make_asymmetric(0.5).unwrap(),
        make_asymmetric(-0.6).unwrap(),
        make_degenerate(0.3).unwrap(),
        make_degenerate(0.5).unwrap(),
        make_skewed(-0.8).unwrap(),
    ];
    for p in &pots {
        for i in 0..=10_000 {
            let s = p.a - 2.0 + (p.b - p.a + 4.0) * i as f64 / 10_000.0;
            let w = p.w(s);
            assert!(w >= 0.0, "{} negative at {s}", p.name());
            if w < 1e-12 {
                assert!((s - p.a).abs() < 1e-5 || (s - p.b).abs() < 1e-5, "{} near-zero at {s}", p.name());
            }
        }
    }
}

#[test]
fn quartic_validation_reports_exponent_and_limit() {
    let rep = validate_potential(&make_quartic(), ValidationTolerances::default());
    assert!(rep.passed(), "{rep}");
    for key in ["well_limit_a_inner", "well_limit_a_outer", "well_limit_b_inner", "well_limit_b_outer"] {
        let l = rep.get(key).unwrap().measured.unwrap();
        assert!((l - 8.0).abs() <= 1e-6, "{key} = {l}");
    }
}

#[test]
fn degenerate_validation_uses_its_exponent() {
    for q in [0.25, 0.5, 0.75] {
        let p = make_degenerate(q).unwrap();
        let rep = validate_potential(&p, ValidationTolerances::default());
        assert!(rep.passed(), "q = {q}\n{rep}");
        let est = rep.get("exponent_a").unwrap().measured.unwrap();
        assert!((est - q).abs() < 1e-3);
    }
}

#[test]
fn asymmetric_rejection_boundary() {
    let lim = 2.0 / std::f64::consts::PI;
    assert!(make_asymmetric(lim * 0.999).is_ok());
    assert!(make_asymmetric(lim).is_err());
    assert!(make_asymmetric(-lim).is_err());
}

proptest! {
    // |W_β − W_0| = |β| (s²−1)² |atan s| ≤ 9 atan(2) |β| on [−2, 2].
    #[test]
    fn asymmetric_converges_to_quartic(beta in -0.6f64..0.6) {
        let p = make_asymmetric(beta).unwrap();
        let q = make_quartic();
        let c = 9.0 * 2f64.atan();
        let mut sup: f64 = 0.0;
        for i in 0..=400 {
            let s = (-2.0 + i as f64 * 0.01f64).clamp(-2.0, 2.0);
            sup = sup.max((p.w(s) - q.w(s)).abs());
        }
        prop_assert!(sup <= c * beta.abs() * (1.0 + 1e-12));
    }

    #[test]
    fn asymmetric_validates_over_admissible_range(beta in -0.6f64..0.6) {
        let p = make_asymmetric(beta).unwrap();
        let rep = validate_potential(&p, ValidationTolerances::default());
        prop_assert!(rep.passed(), "{}", rep);
    }
}
