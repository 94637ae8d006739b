//! Reference sets `E₀` in the unit square with their signed distance.

use crate::field::Field2D;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Geometry {
    Disk { cx: f64, cy: f64, r: f64 },
    /// `{x < width}`.
    Strip { width: f64 },
}

impl Geometry {
    /// Centred disk of area `v`.
    pub fn centred_disk(v: f64) -> Self {
        Geometry::Disk {
            cx: 0.5,
            cy: 0.5,
            r: (v / PI).sqrt(),
        }
    }

    /// Negative inside `E₀`.
    pub fn signed_distance(&self, x: f64, y: f64) -> f64 {
        match *self {
            Geometry::Disk { cx, cy, r } => (x - cx).hypot(y - cy) - r,
            Geometry::Strip { width } => x - width,
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Geometry::Disk { r, .. } => PI * r * r,
            Geometry::Strip { width } => width,
        }
    }

    /// Relative perimeter in the unit square (the set must not touch ∂Ω
    /// except orthogonally, as both shapes here do).
    pub fn perimeter(&self) -> f64 {
        match *self {
            Geometry::Disk { r, .. } => 2.0 * PI * r,
            Geometry::Strip { .. } => 1.0,
        }
    }

    pub fn curvature(&self) -> f64 {
        match *self {
            Geometry::Disk { r, .. } => 1.0 / r,
            Geometry::Strip { .. } => 0.0,
        }
    }

    /// Cell averages of `a χ_{E₀} + b χ_{Ω∖E₀}`, with cut cells resolved by
    /// `sub × sub` point sampling.
    pub fn indicator_field(&self, like: &Field2D, a: f64, b: f64, sub: usize) -> Field2D {
        let h = like.h;
        let sub = sub.max(1);
        let mut f = Field2D::from_fn(like.nx, like.ny, h, |x, y| {
            if self.signed_distance(x, y).abs() > h {
                return if self.signed_distance(x, y) < 0.0 { a } else { b };
            }
            let mut inside = 0usize;
            for p in 0..sub {
                for q in 0..sub {
                    let xs = x - 0.5 * h + (p as f64 + 0.5) * h / sub as f64;
                    let ys = y - 0.5 * h + (q as f64 + 0.5) * h / sub as f64;
                    inside += (self.signed_distance(xs, ys) < 0.0) as usize;
                }
            }
            let frac = inside as f64 / (sub * sub) as f64;
            a * frac + b * (1.0 - frac)
        });
        f.boundary = like.boundary;
        f
    }
}
