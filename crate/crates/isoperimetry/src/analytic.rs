//! Closed-form relative isoperimetry in an axis-aligned rectangle.
//!
//! Competitors are the classical interfaces meeting the boundary
//! orthogonally: straight cuts parallel to a side, quarter disks centred at
//! a corner, and complements of quarter disks. Every competitor has the
//! property that each vertical slice `{y : (x, y) ∈ E}` is a single
//! interval, which makes areas of differences one-dimensional integrals.

use crate::error::{Error, Result};
use gammalab_core::numerics::quad::integrate_with_breaks;
use gammalab_core::numerics::QuadOptions;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rect {
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    StraightCut,
    QuarterDisk,
    DiskComplement,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Branch::StraightCut => "straight-cut",
            Branch::QuarterDisk => "quarter-disk",
            Branch::DiskComplement => "disk-complement",
        }
    }
}

/// Side a straight cut is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CutSide {
    Left,
    Right,
    Bottom,
    Top,
}

/// Corners in counter-clockwise order from the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Corner {
    LowerLeft,
    LowerRight,
    UpperRight,
    UpperLeft,
}

pub const CUT_SIDES: [CutSide; 4] = [CutSide::Left, CutSide::Right, CutSide::Bottom, CutSide::Top];
pub const CORNERS: [Corner; 4] = [Corner::LowerLeft, Corner::LowerRight, Corner::UpperRight, Corner::UpperLeft];

/// One competitor family, parametrised by the enclosed area.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Family {
    Cut(CutSide),
    Disk(Corner),
    Complement(Corner),
}

impl Family {
    pub fn branch(self) -> Branch {
        match self {
            Family::Cut(_) => Branch::StraightCut,
            Family::Disk(_) => Branch::QuarterDisk,
            Family::Complement(_) => Branch::DiskComplement,
        }
    }

    pub fn all() -> impl Iterator<Item = Family> {
        CUT_SIDES
            .into_iter()
            .map(Family::Cut)
            .chain(CORNERS.into_iter().map(Family::Disk))
            .chain(CORNERS.into_iter().map(Family::Complement))
    }
}

/// A concrete competitor set: a family member of prescribed area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Shape {
    pub rect: Rect,
    pub family: Family,
    pub volume: f64,
}

impl Rect {
    pub fn new(width: f64, height: f64) -> Result<Self> {
        if !(width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()) {
            return Err(Error::InvalidParameter(format!("rectangle {width}×{height}")));
        }
        Ok(Self { width, height })
    }

    /// Unit-area rectangle of width `w`.
    pub fn unit_area(w: f64) -> Result<Self> {
        Self::new(w, 1.0 / w)
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn short_side(&self) -> f64 {
        self.width.min(self.height)
    }

    fn corner_point(&self, c: Corner) -> (f64, f64) {
        match c {
            Corner::LowerLeft => (0.0, 0.0),
            Corner::LowerRight => (self.width, 0.0),
            Corner::UpperRight => (self.width, self.height),
            Corner::UpperLeft => (0.0, self.height),
        }
    }

    /// The member of `family` enclosing area `v`, if it exists in this
    /// rectangle.
    pub fn shape(&self, family: Family, v: f64) -> Option<Shape> {
        let a = self.area();
        if !(v > 0.0 && v < a) {
            return None;
        }
        let fits = |disk_area: f64| (4.0 * disk_area / PI).sqrt() <= self.short_side() * (1.0 + 1e-14);
        let ok = match family {
            Family::Cut(_) => true,
            Family::Disk(_) => fits(v),
            Family::Complement(_) => fits(a - v),
        };
        ok.then_some(Shape {
            rect: *self,
            family,
            volume: v,
        })
    }

    /// All admissible competitors of area `v`.
    pub fn competitors(&self, v: f64) -> Vec<Shape> {
        Family::all().filter_map(|f| self.shape(f, v)).collect()
    }

    /// `𝓘(v)` restricted to competitors satisfying `admit`, with the
    /// minimizing shape.
    pub fn profile_where<F: FnMut(&Shape) -> bool>(&self, v: f64, mut admit: F) -> Option<(f64, Shape)> {
        let mut best: Option<(f64, Shape)> = None;
        for s in self.competitors(v) {
            if !admit(&s) {
                continue;
            }
            let p = s.perimeter();
            if best.map_or(true, |(b, _)| p < b) {
                best = Some((p, s));
            }
        }
        best
    }

    /// Relative isoperimetric function over the three families.
    pub fn profile(&self, v: f64) -> Result<(f64, Shape)> {
        if !(v > 0.0 && v < self.area()) {
            return Err(Error::InvalidParameter(format!(
                "volume {v} outside (0, {})",
                self.area()
            )));
        }
        // A straight cut always exists, so the minimum is never empty.
        Ok(self.profile_where(v, |_| true).expect("straight cut admissible"))
    }

    /// `{x ∈ R : d(x, ℝ² ∖ R) > τ}`, again a rectangle.
    pub fn erode(&self, tau: f64) -> Result<Rect> {
        if !(tau >= 0.0) {
            return Err(Error::InvalidParameter(format!("τ = {tau} must be ≥ 0")));
        }
        let (w, h) = (self.width - 2.0 * tau, self.height - 2.0 * tau);
        if w <= 0.0 || h <= 0.0 {
            return Err(Error::EmptyErosion { tau });
        }
        Ok(Rect { width: w, height: h })
    }
}

/// `𝓘_Ω(v)` for the unit-area rectangle `w × 1/w`.
pub fn iso_analytic_rectangle(w: f64, v: f64) -> Result<f64> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::InvalidParameter(format!("volume {v} outside (0, 1)")));
    }
    Ok(Rect::unit_area(w)?.profile(v)?.0)
}

impl Shape {
    pub fn branch(&self) -> Branch {
        self.family.branch()
    }

    fn disk_radius(&self) -> f64 {
        match self.family {
            Family::Disk(_) => (4.0 * self.volume / PI).sqrt(),
            Family::Complement(_) => (4.0 * (self.rect.area() - self.volume) / PI).sqrt(),
            Family::Cut(_) => f64::NAN,
        }
    }

    pub fn perimeter(&self) -> f64 {
        match self.family {
            Family::Cut(CutSide::Left | CutSide::Right) => self.rect.height,
            Family::Cut(CutSide::Bottom | CutSide::Top) => self.rect.width,
            Family::Disk(_) | Family::Complement(_) => 0.5 * PI * self.disk_radius(),
        }
    }

    /// Signed curvature of the free interface, positive when `E` is convex
    /// across it.
    pub fn curvature(&self) -> f64 {
        match self.family {
            Family::Cut(_) => 0.0,
            Family::Disk(_) => 1.0 / self.disk_radius(),
            Family::Complement(_) => -1.0 / self.disk_radius(),
        }
    }

    /// The slice `{y : (x, y) ∈ E}` as `[lo, hi]` (empty when `lo ≥ hi`).
    fn slice(&self, x: f64) -> (f64, f64) {
        let (w, h) = (self.rect.width, self.rect.height);
        let v = self.volume;
        match self.family {
            Family::Cut(CutSide::Left) => {
                if x < v / h {
                    (0.0, h)
                } else {
                    (0.0, 0.0)
                }
            }
            Family::Cut(CutSide::Right) => {
                if x > w - v / h {
                    (0.0, h)
                } else {
                    (0.0, 0.0)
                }
            }
            Family::Cut(CutSide::Bottom) => (0.0, v / w),
            Family::Cut(CutSide::Top) => (h - v / w, h),
            Family::Disk(c) | Family::Complement(c) => {
                let (cx, cy) = self.rect.corner_point(c);
                let r = self.disk_radius();
                let dx = (x - cx).abs();
                let q = if dx < r { (r * r - dx * dx).sqrt().min(h) } else { 0.0 };
                let lower = cy == 0.0;
                match (self.family, lower) {
                    (Family::Disk(_), true) => (0.0, q),
                    (Family::Disk(_), false) => (h - q, h),
                    (_, true) => (q, h),
                    (_, false) => (0.0, h - q),
                }
            }
        }
    }

    fn breaks(&self) -> Vec<f64> {
        let (w, h) = (self.rect.width, self.rect.height);
        match self.family {
            Family::Cut(CutSide::Left) => vec![self.volume / h],
            Family::Cut(CutSide::Right) => vec![w - self.volume / h],
            Family::Cut(_) => vec![],
            Family::Disk(c) | Family::Complement(c) => {
                let (cx, _) = self.rect.corner_point(c);
                let r = self.disk_radius();
                vec![cx - r, cx + r]
            }
        }
    }

    /// `|self ∩ other|` by integrating slice overlaps.
    pub fn intersection_area(&self, other: &Shape) -> Result<f64> {
        let w = self.rect.width;
        let mut breaks: Vec<f64> = self
            .breaks()
            .into_iter()
            .chain(other.breaks())
            .filter(|&b| b > 0.0 && b < w)
            .collect();
        breaks.sort_by(f64::total_cmp);
        let f = |x: f64| {
            let (a0, a1) = self.slice(x);
            let (b0, b1) = other.slice(x);
            (a1.min(b1) - a0.max(b0)).max(0.0)
        };
        let opts = QuadOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_segments: 20_000,
        };
        Ok(integrate_with_breaks(f, 0.0, w, &breaks, opts)?.value)
    }

    /// `α(self, other)` over the rectangle.
    pub fn alpha(&self, other: &Shape) -> Result<f64> {
        let both = self.intersection_area(other)?;
        let a = (self.volume - both).max(0.0);
        let b = (other.volume - both).max(0.0);
        Ok(a.min(b))
    }
}

/// Local profile `𝓘^{E₀,δ}` restricted to the competitor families: the least
/// perimeter among members of area `v` with `α(E₀, E) ≤ δ`.
pub fn local_profile(e0: &Shape, delta: f64, v: f64) -> Result<Option<(f64, Shape)>> {
    let mut err = None;
    let best = e0.rect.profile_where(v, |s| match e0.alpha(s) {
        Ok(a) => a <= delta + 1e-11,
        Err(e) => {
            err.get_or_insert(e);
            false
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(best),
    }
}
