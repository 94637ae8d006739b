mod common;

use common::{rectangle_weight, smooth_weight};
use gammalab_core::gamma2::{predict_f2_q1, MinimizerGeometry};
use gammalab_core::potential::{make_asymmetric, make_quartic};
use gammalab_core::profile::solve_tau_q1;
use gammalab_core::LayerModel;
use gammalab_weighted::analysis::*;
use gammalab_weighted::WeightFunction;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn quartic() -> LayerModel {
    LayerModel::new(&make_quartic()).unwrap()
}

#[test]
fn first_order_limit_values() {
    let layer = quartic();
    let cw = layer.constants.c_w;
    let flat = WeightFunction::flat(1.0, 0.5).unwrap();
    assert!((gamma_limit_value(&flat, cw, &[0.0]).unwrap() - 8.0 / 3.0).abs() < 1e-10);
    let w = smooth_weight(1.7, 0.3, 0.5, 2);
    assert!((gamma_limit_value(&w, cw, &[0.0]).unwrap() - 2.0 * cw * 1.7).abs() < 1e-12);
    let rect = rectangle_weight();
    for t in [-0.3, 0.3] {
        let v = gamma_limit_value(&rect, cw, &[t]).unwrap();
        assert!((v - 2.0 * cw * rect.eta(t)).abs() < 1e-15);
    }
    assert!(gamma_limit_value(&flat, cw, &[-0.1, 0.1]).is_err());
}

#[test]
fn layer_shift_values() {
    let layer = quartic();
    let k = &layer.constants;
    let flat = WeightFunction::flat(1.0, 0.5).unwrap();
    assert!(solve_tau0(&flat, k, 0.0).unwrap().abs() < 1e-10);
    let w = smooth_weight(1.0, 1.0, 0.5, 2);
    let lambda0 = 2.0 * k.c_w / k.gap();
    let tau0 = solve_tau0(&w, k, lambda0).unwrap();
    assert!((tau0 + 1.0 / 12.0).abs() < 1e-8, "{tau0}");
    assert!((tau0 - solve_tau_q1(1.0, 1.0, 2, k).unwrap()).abs() < 1e-12);
    for lam in [-0.7, 0.0, 0.4, 1.3] {
        let a = solve_tau0(&w, k, lam).unwrap();
        let b = solve_tau0_bisection(&w, &layer, lam).unwrap();
        assert!((a - b).abs() <= 1e-10, "λ0 = {lam}: {a} vs {b}");
    }
}

#[test]
fn liminf_value_special_cases() {
    let layer = quartic();
    let k = &layer.constants;
    assert_eq!(rhs_from_parts(&layer, 0.0, 0.0, 1.0, 0.0, 0.3).unwrap(), 0.0);
    for (g, tau) in [(0.5, 0.0), (-1.2, 0.4), (2.0, -0.25)] {
        let v = rhs_from_parts(&layer, g, g, 1.0, 0.0, tau).unwrap();
        let expect = 2.0 * g * (k.c_sym + tau * k.c_w);
        assert!((v - expect).abs() <= 1e-9, "g = {g}, τ = {tau}");
    }
    // Asymmetric potential: the half-line moments still sum to c_sym + τ c_W.
    let asym = LayerModel::new(&make_asymmetric(0.5).unwrap()).unwrap();
    let v = rhs_from_parts(&asym, 1.0, 1.0, 1.0, 0.0, 0.2).unwrap();
    assert!((v - 2.0 * (asym.constants.c_sym + 0.2 * asym.constants.c_w)).abs() <= 1e-9);
}

#[test]
fn liminf_value_is_jointly_linear_in_weight_data() {
    let layer = quartic();
    let (lam, tau) = (0.9, -0.05);
    let base = rhs_from_parts(&layer, 1.1, 0.2, 1.0, lam, tau).unwrap();
    let doubled = rhs_from_parts(&layer, 2.2, 0.4, 2.0, lam, tau).unwrap();
    assert!((doubled - 2.0 * base).abs() < 1e-12);
    let sum = rhs_from_parts(&layer, 1.1 + 0.3, 0.2 - 0.1, 1.0 + 0.5, lam, tau).unwrap();
    let parts = base + rhs_from_parts(&layer, 0.3, -0.1, 0.5, lam, tau).unwrap();
    assert!((sum - parts).abs() < 1e-12);
}

#[test]
fn composed_weight_reproduces_closed_form_second_order_energy() {
    let layer = quartic();
    let k = &layer.constants;
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..5 {
        let kappa = rng.gen_range(-2.0..2.0);
        let p = rng.gen_range(0.5..2.0);
        let n: u32 = rng.gen_range(2..=3);
        let w = smooth_weight(p, (n as f64 - 1.0) * kappa, 0.5, n);
        let (lo, hi) = lambda_bracket(&w, k);
        assert!((lo - hi).abs() < 1e-12);
        let tau0 = solve_tau0(&w, k, lo).unwrap();
        let rhs = theorem31_rhs(&w, &layer, lo, tau0).unwrap();
        let f2 = predict_f2_q1(&MinimizerGeometry::new(kappa, p, n), k).unwrap();
        assert!((rhs - f2).abs() <= 1e-6, "κ = {kappa}, P = {p}, n = {n}: {rhs} vs {f2}");
    }
}

#[test]
fn lambda_limit_on_flat_ladder() {
    use gammalab_weighted::minimize_ladder;
    use gammalab_weighted::solver::limit_mass;
    let layer = quartic();
    let w = WeightFunction::flat(1.0, 0.5).unwrap();
    let m = limit_mass(&w, layer.potential());
    let rs = minimize_ladder(&w, &layer, m, &[0.04, 0.02, 0.01], &Default::default()).unwrap();
    let lam = extract_lambda_limit(&rs, &w, &layer.constants).unwrap();
    assert_eq!(lam.bracket, (0.0, 0.0));
    assert!(lam.estimate.abs() < 1e-6);
    assert!(extract_lambda_limit(&rs[..2], &w, &layer.constants).is_err());
}

#[test]
fn noisy_sequences_are_not_extrapolated() {
    assert!(extrapolate_in_eps(&[0.04, 0.02, 0.01], &[1.0, 1.2, 1.05]).is_none());
    let ex = extrapolate_in_eps(&[0.04, 0.02, 0.01], &[1.0 + 0.04, 1.0 + 0.02, 1.0 + 0.01]).unwrap();
    assert!((ex - 1.0).abs() < 1e-12);
    let ex = extrapolate_in_eps(&[0.05, 0.03, 0.01], &[2.05, 2.03, 2.01]).unwrap();
    assert!((ex - 2.0).abs() < 1e-12);
}
