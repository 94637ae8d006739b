#![allow(dead_code)]

use gammalab_weighted::iso::{build_touching_iso, TouchingParams};
use gammalab_weighted::weight::{build_eta, solve_v, WeightFunction};
use std::f64::consts::PI;

pub fn rectangle_reference(count: usize) -> Vec<(f64, f64)> {
    (1..count)
        .map(|i| {
            let v = i as f64 / count as f64;
            (v, (PI * v).sqrt().min(1.0).min((PI * (1.0 - v)).sqrt()))
        })
        .collect()
}

/// Weight of the square at the volume where the quarter disk and the
/// straight cut have equal perimeter.
pub fn rectangle_weight() -> WeightFunction {
    let iso = build_touching_iso(&TouchingParams::new(1.0, PI / 2.0, 0.0, 1.0 / PI, 2), &rectangle_reference(4000)).unwrap();
    build_eta(&iso, &solve_v(&iso).unwrap())
}

/// Weight from a differentiable surrogate with value `p` and slope `s` at `vm`.
pub fn smooth_weight(p: f64, s: f64, vm: f64, n: u32) -> WeightFunction {
    let iso = build_touching_iso(&TouchingParams::smooth(p, s, vm, n), &[]).unwrap();
    build_eta(&iso, &solve_v(&iso).unwrap())
}
