use std::f64::consts::PI;

use gammalab_core::gamma2::{
    iso_derivative_relation, predict_f2, predict_f2_q1, predict_f2_qlt1, select_minimizer, MinimizerGeometry,
};
use gammalab_core::potential::{make_asymmetric, make_degenerate, make_quartic, make_skewed};
use gammalab_core::profile::LayerModel;

#[test]
fn quartic_unit_curvature_value() {
    let m = LayerModel::new(&make_quartic()).unwrap();
    let v = predict_f2_q1(&MinimizerGeometry::new(1.0, 1.0, 2), &m.constants).unwrap();
    assert!((v + 1.0 / 9.0).abs() <= 1e-10);
}

#[test]
fn curvature_sign_flip_for_symmetric_potential() {
    let m = LayerModel::new(&make_quartic()).unwrap();
    for (k, p, n) in [(0.7, 1.3, 2), (2.0, 0.5, 3), (1.1, 1.0, 2)] {
        let a = predict_f2_q1(&MinimizerGeometry::new(k, p, n), &m.constants).unwrap();
        let b = predict_f2_q1(&MinimizerGeometry::new(-k, p, n), &m.constants).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }
}

#[test]
fn quadratic_in_curvature() {
    let m = LayerModel::new(&make_asymmetric(0.5).unwrap()).unwrap();
    let f = |k: f64| predict_f2_q1(&MinimizerGeometry::new(k, 1.4, 3), &m.constants).unwrap();
    // Quadratic through κ = −1, 0, 1 predicts κ = 2.5 exactly.
    let (fm, f0, fp) = (f(-1.0), f(0.0), f(1.0));
    let c2 = 0.5 * (fp + fm) - f0;
    let c1 = 0.5 * (fp - fm);
    let k = 2.5;
    assert!((f0 + c1 * k + c2 * k * k - f(k)).abs() <= 1e-12);
    assert!(f0.abs() < 1e-15);
}

#[test]
fn reflection_invariance_with_equal_well_curvatures() {
    // Reflecting the potential swaps the phases: the a-phase of the reflected
    // problem is the complement, whose curvature has the opposite sign.
    let p = make_skewed(0.6).unwrap();
    let m = LayerModel::new(&p).unwrap();
    let r = LayerModel::new(&p.reflected()).unwrap();
    assert!(m.constants.c_sym.abs() > 1e-3);
    for (k, per, n) in [(1.0, 1.0, 2), (-0.4, 2.0, 3), (1.7, 0.6, 2)] {
        let a = predict_f2(&MinimizerGeometry::new(k, per, n), &m.constants).unwrap();
        let b = predict_f2(&MinimizerGeometry::new(-k, per, n), &r.constants).unwrap();
        assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
    }
}

#[test]
fn reflection_of_asymmetric_potential_keeps_the_layer_term() {
    // With unequal well curvatures only the c_sym/τ part is reflection-invariant.
    let p = make_asymmetric(0.5).unwrap();
    let m = LayerModel::new(&p).unwrap();
    let r = LayerModel::new(&p.reflected()).unwrap();
    let (km, kr) = (m.constants, r.constants);
    assert!((km.c_sym + kr.c_sym).abs() < 1e-9);
    assert!((km.i0 + kr.i0).abs() < 1e-9);
    assert!((km.c_w - kr.c_w).abs() < 1e-12);
}

#[test]
fn degenerate_values() {
    let m = LayerModel::new(&make_degenerate(0.5).unwrap()).unwrap();
    assert_eq!(predict_f2_qlt1(&MinimizerGeometry::new(0.0, 1.0, 2), &m.constants).unwrap(), 0.0);
    // Linear in P at fixed κ, n (evaluated on the translated layer so that
    // the layer term is nonzero).
    let shifted = gammalab_core::profile::Constants::compute(&m.profile.shifted(0.3)).unwrap();
    let f = |p: f64| predict_f2_qlt1(&MinimizerGeometry::new(0.8, p, 2), &shifted).unwrap();
    assert!((f(2.0) - 2.0 * f(1.0)).abs() < 1e-12);
}

#[test]
fn quarter_disk_slope_equals_curvature() {
    for v in [0.05, 0.15, 0.25, 1.0 / PI] {
        let r = (4.0 * v / PI).sqrt();
        let slope = (PI / v).sqrt() / 2.0;
        assert!((iso_derivative_relation(1.0 / r, 2) - slope).abs() < 1e-12);
    }
    assert_eq!(iso_derivative_relation(0.0, 3), 0.0);
    assert_eq!(iso_derivative_relation(1.0, 2), 1.0);
}

#[test]
fn rectangle_crossover_prefers_the_quarter_disk() {
    let m = LayerModel::new(&make_quartic()).unwrap();
    let strip = MinimizerGeometry::new(0.0, 1.0, 2);
    let kappa = PI / 2.0; // quarter circle of area 1/π has radius 2/π
    let disk = MinimizerGeometry::new(kappa, 1.0, 2);
    let sel = select_minimizer(&[strip, disk], &m.constants, 1e-12).unwrap();
    assert_eq!(sel.index, 1);
    assert_eq!(sel.values[0], 0.0);
    assert!((sel.values[1] + PI * PI / 36.0).abs() < 1e-10, "{}", sel.values[1]);
    assert_eq!(sel.ties, vec![1]);
}
