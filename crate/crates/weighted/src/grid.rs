//! Nonuniform grids on `[A, B]`: uniform across the layer window around
//! `t0`, geometrically coarsened outside it and graded toward the ends.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridOptions {
    /// Cells per unit of `ε` inside the layer window.
    pub points_per_eps: f64,
    /// Half-width of the uniform window, in units of `ε`.
    pub core_halfwidth: f64,
    /// Ratio between consecutive cells outside the window.
    pub growth: f64,
    pub h_max: f64,
    /// Cells near an end are at most this fraction of the distance to it...
    pub end_fraction: f64,
    /// ...but never smaller than this or the window spacing.
    pub h_end: f64,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            points_per_eps: 128.0,
            core_halfwidth: 24.0,
            growth: 1.05,
            h_max: 1e-2,
            end_fraction: 0.25,
            h_end: 1e-4,
        }
    }
}

fn march(from: f64, to: f64, eps: f64, o: &GridOptions) -> Vec<f64> {
    let dir = (to - from).signum();
    let hc = eps / o.points_per_eps;
    let core = o.core_halfwidth * eps;
    let mut out = vec![from];
    let mut t = from;
    let mut h = hc;
    loop {
        let dist_end = (to - t).abs();
        h = if (t - from).abs() < core - 0.5 * hc { hc } else { (h * o.growth).min(o.h_max).max(hc) };
        h = h.min((o.end_fraction * dist_end).max(o.h_end.max(hc)));
        if h >= dist_end - 0.5 * h.min(dist_end) {
            out.push(to);
            return out;
        }
        t += dir * h;
        out.push(t);
    }
}

/// Grid with a node exactly at `t0` and at both ends.
pub fn build_grid(a: f64, b: f64, t0: f64, eps: f64, o: &GridOptions) -> Result<Vec<f64>> {
    if !(a < t0 && t0 < b) || !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("grid needs A < t0 < B and eps > 0 (got {a}, {t0}, {b}, {eps})")));
    }
    let mut left = march(t0, a, eps, o);
    left.reverse();
    let right = march(t0, b, eps, o);
    left.extend(right.into_iter().skip(1));
    Ok(left)
}

/// Splits every cell in two.
pub fn refine(t: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * t.len() - 1);
    for w in t.windows(2) {
        out.push(w[0]);
        out.push(0.5 * (w[0] + w[1]));
    }
    out.push(t[t.len() - 1]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_increasing_and_hits_marks() {
        let g = build_grid(-0.7, 1.3, 0.0, 0.01, &GridOptions::default()).unwrap();
        assert_eq!(g[0], -0.7);
        assert_eq!(*g.last().unwrap(), 1.3);
        assert!(g.contains(&0.0));
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        let hc = 0.01 / 128.0;
        let near: Vec<f64> = g.windows(2).filter(|w| w[0].abs() < 0.2).map(|w| w[1] - w[0]).collect();
        assert!(near.iter().all(|h| (h - hc).abs() < 1e-12));
        let r = refine(&g);
        assert_eq!(r.len(), 2 * g.len() - 1);
    }
}
