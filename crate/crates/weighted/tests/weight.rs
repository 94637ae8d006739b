use gammalab_core::numerics::{integrate_algebraic, QuadOptions};
use gammalab_weighted::iso::{build_touching_iso, Side, TouchingIso, TouchingParams};
use gammalab_weighted::weight::{build_eta, solve_v, validate_eta, WeightFunction};
use std::f64::consts::PI;

fn rectangle_weight() -> (TouchingIso, WeightFunction) {
    let reference: Vec<(f64, f64)> = (1..4000)
        .map(|i| {
            let v = i as f64 / 4000.0;
            (v, (PI * v).sqrt().min(1.0).min((PI * (1.0 - v)).sqrt()))
        })
        .collect();
    let iso = build_touching_iso(&TouchingParams::new(1.0, PI / 2.0, 0.0, 1.0 / PI, 2), &reference).unwrap();
    let w = build_eta(&iso, &solve_v(&iso).unwrap());
    (iso, w)
}

/// `∫_{v1}^{v2} dv / 𝓘(v)`, with the algebraic singularities at 0 and 1
/// handled by the endpoint substitution.
fn time_between(iso: &TouchingIso, v1: f64, v2: f64) -> f64 {
    let beta = iso.beta();
    let mut cuts: Vec<f64> = iso.breakpoints().into_iter().filter(|&b| b > v1 && b < v2).collect();
    cuts.insert(0, v1);
    cuts.push(v2);
    let mut total = 0.0;
    for w in cuts.windows(2).filter(|w| w[1] > w[0]) {
        let ga = if w[0] == 0.0 { -beta } else { 0.0 };
        let gb = if w[1] == 1.0 { -beta } else { 0.0 };
        let f = |v: f64, da: f64, db: f64| {
            let y = if w[0] == 0.0 && v <= iso.r {
                iso.c0 * da.powf(beta)
            } else if w[1] == 1.0 && v >= 1.0 - iso.r {
                iso.c0 * db.powf(beta)
            } else {
                iso.value(v)
            };
            1.0 / y
        };
        total += integrate_algebraic(f, w[0], w[1], ga, gb, QuadOptions::default()).unwrap_or_else(|e| panic!("{e} on {w:?}")).value;
    }
    total
}

#[test]
fn constant_stub_is_linear() {
    let iso = TouchingIso::constant(2.0, 0.25);
    let tab = solve_v(&iso).unwrap();
    assert!((tab.a + 0.125).abs() < 1e-15 && (tab.b - 0.375).abs() < 1e-15);
    for t in [-0.1, 0.0, 0.2] {
        assert!((tab.eval(t) - (0.25 + 2.0 * t)).abs() < 1e-15);
    }
    let w = build_eta(&iso, &tab);
    assert_eq!(w.deta_minus, 0.0);
    assert_eq!(w.deta_plus, 0.0);
    assert!((w.eta(0.3) - 2.0).abs() < 1e-15);
    assert!((w.total_mass() - 1.0).abs() < 1e-15);
}

#[test]
fn endpoints_match_quadrature_of_inverse() {
    for (iso, _) in [rectangle_weight()] {
        let tab = solve_v(&iso).unwrap();
        let a = -time_between(&iso, 0.0, iso.vm);
        let b = a + time_between(&iso, 0.0, 1.0);
        assert!((tab.a - a).abs() < 1e-9, "A {} vs {a}", tab.a);
        assert!((tab.b - b).abs() < 1e-9, "B {} vs {b}", tab.b);
    }
}

#[test]
fn time_of_volume_inverts_v() {
    let iso = build_touching_iso(&TouchingParams::smooth(1.2, 0.8, 0.45, 3), &[]).unwrap();
    let tab = solve_v(&iso).unwrap();
    let mut worst: f64 = 0.0;
    for k in 1..60 {
        let v = k as f64 / 60.0;
        let t = if v < iso.vm { -time_between(&iso, v, iso.vm) } else { time_between(&iso, iso.vm, v) };
        worst = worst.max((tab.eval(t) - v).abs());
    }
    assert!(worst <= 1e-8, "round trip {worst:e}");
    let mut prev = 0.0;
    for k in 1..1000 {
        let t = tab.a + (tab.b - tab.a) * k as f64 / 1000.0;
        let v = tab.eval(t);
        assert!(v > prev && v < 1.0);
        prev = v;
    }
}

#[test]
fn pure_tail_is_quadratic_in_time_for_planar_case() {
    let (iso, w) = rectangle_weight();
    let tab = w.v_table().unwrap();
    for k in 1..20 {
        let s = 1e-3 * k as f64;
        let expect = (iso.c0 * s / 2.0).powi(2);
        assert!((tab.eval(tab.a + s) - expect).abs() <= 1e-12 * (1.0 + expect), "s = {s}");
    }
}

#[test]
fn masses_and_chain_rule() {
    let (_, w) = rectangle_weight();
    assert!((w.quad_mass(w.a, 0.0).unwrap() - 1.0 / PI).abs() <= 1e-10);
    assert!((w.quad_mass(w.a, w.b).unwrap() - 1.0).abs() <= 1e-10);
    assert!((w.eta0 - 1.0).abs() < 1e-15);
    assert!((w.deta_minus - PI / 2.0).abs() < 1e-14);
    assert!(w.deta_plus.abs() < 1e-14);
    let h = 1e-5;
    let fd_minus = (3.0 * w.eta(0.0) - 4.0 * w.eta(-h) + w.eta(-2.0 * h)) / (2.0 * h);
    let fd_plus = (-3.0 * w.eta(0.0) + 4.0 * w.eta(h) - w.eta(2.0 * h)) / (2.0 * h);
    assert!((fd_minus - PI / 2.0).abs() <= 1e-6, "{fd_minus}");
    assert!(fd_plus.abs() <= 1e-6, "{fd_plus}");
    // Away from the kink the derivative is 𝓘'(V) η.
    for t in [-0.6, -0.2, 0.3, 1.1] {
        let fd = (w.eta(t + h) - w.eta(t - h)) / (2.0 * h);
        assert!((fd - w.deta(t)).abs() <= 1e-6, "t = {t}");
    }
}

#[test]
fn rectangle_weight_passes_all_hypotheses() {
    let (_, w) = rectangle_weight();
    let rep = validate_eta(&w);
    assert!(rep.passed(), "{rep}");
    assert!(w.constants.d1 > 0.0 && w.constants.d2 / w.constants.d1 < 1.01);
}

#[test]
fn reversed_kink_fails_orientation() {
    // η'_- = -1 < η'_+ = 1 at t0 = 0.
    let w = WeightFunction::custom(
        -1.0,
        1.0,
        0.0,
        2,
        1.0,
        |t: f64| (1.0 - t * t) * (1.0 + 0.5 * t.abs()) / 1.5,
        |t: f64, side| {
            let s = if t > 0.0 || (t == 0.0 && side == Side::Right) { 1.0 } else { -1.0 };
            (-2.0 * t * (1.0 + 0.5 * t.abs()) + (1.0 - t * t) * 0.5 * s) / 1.5
        },
    )
    .unwrap();
    let rep = validate_eta(&w);
    assert!(!rep.get("eta4_kink").unwrap().passed, "{rep}");
    assert!(rep.get("eta1_one_sided_c1").unwrap().passed, "{rep}");
}

#[test]
fn linear_decay_against_planar_tail_exponent_fails() {
    // η vanishes linearly at both ends but claims the (n-1)/n = 1/2 law.
    let w = WeightFunction::custom(-1.0, 1.0, 0.0, 2, 0.5, |t: f64| 0.75 * (1.0 - t * t), |t: f64, _| -1.5 * t).unwrap();
    let rep = validate_eta(&w);
    let c = rep.get("eta2_endpoint_a").unwrap();
    assert!(!c.passed, "{rep}");
    assert!((c.measured.unwrap() - 1.0).abs() < 1e-3);
    assert!(rep.get("eta5_total_mass").unwrap().passed, "{rep}");
}

#[test]
fn flat_weight_masses() {
    let w = WeightFunction::flat(1.0, 0.5).unwrap();
    let rep = validate_eta(&w);
    assert!(rep.passed(), "{rep}");
    assert_eq!(w.mass_below(0.0), 0.5);
}
