use gammalab_weighted::iso::{build_touching_iso, build_with_drop, Side, TouchingParams};
use gammalab_weighted::Error;
use proptest::prelude::*;
use std::f64::consts::PI;

fn rectangle_reference(count: usize) -> Vec<(f64, f64)> {
    (1..count)
        .map(|i| {
            let v = i as f64 / count as f64;
            (v, (PI * v).sqrt().min(1.0).min((PI * (1.0 - v)).sqrt()))
        })
        .collect()
}

fn one_sided(f: impl Fn(f64) -> f64, x: f64, h: f64) -> (f64, f64) {
    let left = (3.0 * f(x) - 4.0 * f(x - h) + f(x - 2.0 * h)) / (2.0 * h);
    let right = (-3.0 * f(x) + 4.0 * f(x + h) - f(x + 2.0 * h)) / (2.0 * h);
    (left, right)
}

#[test]
fn flat_reference_gives_flat_window() {
    let p = TouchingParams::new(1.5, 0.0, 0.0, 0.4, 2);
    let reference: Vec<(f64, f64)> = (0..=40).map(|i| (0.31 + 0.18 * i as f64 / 40.0, 1.5)).collect();
    let iso = build_touching_iso(&p, &reference).unwrap();
    assert_eq!(iso.k, 0.0);
    for i in 0..=100 {
        let v = iso.vm - iso.half_width + 2.0 * iso.half_width * i as f64 / 100.0;
        assert!((iso.value(v) - 1.5).abs() < 1e-14);
    }
}

#[test]
fn rectangle_crossover_is_dominated_with_exact_slopes() {
    let reference = rectangle_reference(4000);
    let iso = build_touching_iso(&TouchingParams::new(1.0, PI / 2.0, 0.0, 1.0 / PI, 2), &reference).unwrap();
    assert!(iso.domination_excess() <= 1e-12, "excess {}", iso.domination_excess());
    assert!(iso.k >= PI * PI / 8.0, "left branch needs K >= π²/8, got {}", iso.k);
    // A denser independent sampling of the reference.
    for (v, y) in rectangle_reference(100_003) {
        assert!(iso.value(v) <= y + 1e-12, "v = {v}");
    }
    let (dl, dr) = one_sided(|v| iso.value(v), iso.vm, 1e-4);
    assert!((dl - PI / 2.0).abs() <= 1e-8, "left slope {dl}");
    assert!(dr.abs() <= 1e-8, "right slope {dr}");
    assert_eq!(iso.deriv(iso.vm, Side::Left), PI / 2.0);
    assert_eq!(iso.deriv(iso.vm, Side::Right), 0.0);
    assert!((iso.value(iso.vm) - 1.0).abs() < 1e-15);
}

#[test]
fn tails_are_exact_power_laws() {
    let iso = build_touching_iso(&TouchingParams::smooth(1.0, 0.5, 0.5, 3), &[]).unwrap();
    let beta = 2.0 / 3.0;
    for k in 1..50 {
        let v = iso.r * k as f64 / 50.0;
        assert!((iso.value(v) - iso.c0 * v.powf(beta)).abs() < 1e-15);
        assert!((iso.value(1.0 - v) - iso.c0 * v.powf(beta)).abs() < 1e-14);
    }
}

#[test]
fn anchor_dip_is_rejected() {
    let reference = vec![(0.3, 2.0), (0.5, 0.99), (0.7, 2.0)];
    match build_touching_iso(&TouchingParams::new(1.0, 0.2, -0.2, 0.5, 2), &reference) {
        Err(e @ Error::AnchorNotMinimal { .. }) => assert!(e.to_string().contains("anchor not a minimizer value")),
        other => panic!("expected anchor error, got {other:?}"),
    }
}

#[test]
fn slope_order_is_enforced() {
    assert!(build_touching_iso(&TouchingParams::new(1.0, -0.1, 0.1, 0.5, 2), &[]).is_err());
}

#[test]
fn raising_the_drop_lowers_the_cone_only() {
    let p = TouchingParams::new(1.0, 1.0, -0.5, 0.5, 2);
    let lo = build_with_drop(&p, 0.5).unwrap();
    let hi = build_with_drop(&p, 4.0).unwrap();
    for i in 1..100 {
        let v = lo.vm - lo.half_width + 2.0 * lo.half_width * i as f64 / 100.0;
        if v != lo.vm {
            assert!(hi.value(v) < lo.value(v));
        }
    }
    for s in [Side::Left, Side::Right] {
        assert_eq!(hi.deriv(hi.vm, s), lo.deriv(lo.vm, s));
    }
    assert_eq!(hi.value(hi.vm), lo.value(lo.vm));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn construction_is_positive_and_c1_off_the_kink(
        p0 in 0.5f64..2.0,
        s_plus in -2.0f64..2.0,
        spread in 0.0f64..2.0,
        vm in 0.3f64..0.7,
        n in 2u32..4,
    ) {
        let iso = build_touching_iso(&TouchingParams::new(p0, s_plus + spread, s_plus, vm, n), &[]).unwrap();
        for i in 1..2000 {
            prop_assert!(iso.value(i as f64 / 2000.0) > 0.0);
        }
        for &b in &iso.breakpoints() {
            let (l, r) = (iso.eval_side(b, Side::Left), iso.eval_side(b, Side::Right));
            let (vl, vr) = (iso.value(b - 1e-9), iso.value(b + 1e-9));
            prop_assert!((vl - vr).abs() < 1e-7, "jump at {b}");
            if b != iso.vm {
                prop_assert!((l.1 - r.1).abs() < 1e-9, "derivative jump at {b}");
                let (dl, dr) = one_sided(|v| iso.value(v), b, 1e-5);
                prop_assert!((dl - dr).abs() < 1e-6 * (1.0 + dl.abs()), "kink at {b}: {dl} vs {dr}");
            }
        }
    }
}
