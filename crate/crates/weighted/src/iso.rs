//! The touching surrogate `𝓘` of an isoperimetric function: a kink cone at
//! the anchor volume `v_m`, power-law tails at both ends and C¹ blends in
//! between (cubic Hermite in `log 𝓘`, which keeps them positive).

use crate::error::{Error, Result};
use serde::Serialize;

/// Which one-sided derivative to take at a breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, Serialize)]
struct Hermite {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    m0: f64,
    m1: f64,
}

impl Hermite {
    /// Blend through positive end values `y` with slopes `m`, interpolating
    /// `log y` so the result stays positive.
    fn log_blend(x0: f64, x1: f64, y0: f64, y1: f64, m0: f64, m1: f64) -> Self {
        Self {
            x0,
            x1,
            y0: y0.ln(),
            y1: y1.ln(),
            m0: m0 / y0,
            m1: m1 / y1,
        }
    }

    fn eval_exp(&self, x: f64) -> (f64, f64) {
        let (l, dl) = self.eval(x);
        let y = l.exp();
        (y, y * dl)
    }

    fn eval(&self, x: f64) -> (f64, f64) {
        let h = self.x1 - self.x0;
        let s = (x - self.x0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let v = h00 * self.y0 + h10 * h * self.m0 + h01 * self.y1 + h11 * h * self.m1;
        let d00 = 6.0 * s2 - 6.0 * s;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = -d00;
        let d11 = 3.0 * s2 - 2.0 * s;
        let d = (d00 * self.y0 + d01 * self.y1) / h + d10 * self.m0 + d11 * self.m1;
        (v, d)
    }
}

/// Construction parameters; `None` fields are chosen automatically.
#[derive(Debug, Clone)]
pub struct TouchingParams {
    pub p0: f64,
    pub s_minus: f64,
    pub s_plus: f64,
    pub vm: f64,
    pub n: u32,
    pub c0: Option<f64>,
    pub r: Option<f64>,
    /// Half-width of the central kink window.
    pub half_width: Option<f64>,
}

impl TouchingParams {
    pub fn new(p0: f64, s_minus: f64, s_plus: f64, vm: f64, n: u32) -> Self {
        Self {
            p0,
            s_minus,
            s_plus,
            vm,
            n,
            c0: None,
            r: None,
            half_width: None,
        }
    }

    /// Differentiable anchor: equal one-sided slopes.
    pub fn smooth(p0: f64, slope: f64, vm: f64, n: u32) -> Self {
        Self::new(p0, slope, slope, vm, n)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TouchingIso {
    pub p0: f64,
    pub s_minus: f64,
    pub s_plus: f64,
    /// Quadratic drop of the kink cone.
    pub k: f64,
    pub c0: f64,
    pub r: f64,
    pub vm: f64,
    pub half_width: f64,
    pub n: u32,
    /// `false` for the constant test stub, which has no power tails.
    pub tails: bool,
    left: Option<Hermite>,
    right: Option<Hermite>,
    /// Reference samples `(v, 𝓘_ref(v))` the surrogate was checked against.
    pub reference: Vec<(f64, f64)>,
}

impl TouchingIso {
    /// Constant `𝓘 ≡ c` with the anchor at `vm` and no tails.
    pub fn constant(c: f64, vm: f64) -> Self {
        Self {
            p0: c,
            s_minus: 0.0,
            s_plus: 0.0,
            k: 0.0,
            c0: c,
            r: 0.0,
            vm,
            half_width: 0.5,
            n: 2,
            tails: false,
            left: None,
            right: None,
            reference: Vec::new(),
        }
    }

    /// Tail exponent `(n-1)/n`.
    pub fn beta(&self) -> f64 {
        (self.n as f64 - 1.0) / self.n as f64
    }

    /// Volumes where the construction switches pieces (left to right).
    pub fn breakpoints(&self) -> Vec<f64> {
        if !self.tails {
            return vec![self.vm];
        }
        let w = self.half_width;
        vec![self.r, self.vm - w, self.vm, self.vm + w, 1.0 - self.r]
    }

    fn central(&self, v: f64, side: Side) -> (f64, f64) {
        let d = v - self.vm;
        let s = match side {
            Side::Left => self.s_minus,
            Side::Right => self.s_plus,
        };
        (self.p0 + s * d - self.k * d * d, s - 2.0 * self.k * d)
    }

    /// Value and one-sided derivative. The side only matters at breakpoints,
    /// and off the kink all pieces join in C¹ fashion.
    pub fn eval_side(&self, v: f64, side: Side) -> (f64, f64) {
        if !self.tails {
            return (self.p0, 0.0);
        }
        let beta = self.beta();
        let w = self.half_width;
        let left_side = match side {
            Side::Left => v <= self.vm,
            Side::Right => v < self.vm,
        };
        if v <= self.r {
            (self.c0 * v.powf(beta), self.c0 * beta * v.powf(beta - 1.0))
        } else if v >= 1.0 - self.r {
            let u = 1.0 - v;
            (self.c0 * u.powf(beta), -self.c0 * beta * u.powf(beta - 1.0))
        } else if v < self.vm - w {
            self.left.unwrap().eval_exp(v)
        } else if v > self.vm + w {
            self.right.unwrap().eval_exp(v)
        } else if left_side {
            self.central(v, Side::Left)
        } else {
            self.central(v, Side::Right)
        }
    }

    pub fn value(&self, v: f64) -> f64 {
        self.eval_side(v, Side::Right).0
    }

    pub fn deriv(&self, v: f64, side: Side) -> f64 {
        self.eval_side(v, side).1
    }

    fn assemble(p: &TouchingParams, k: f64, c0: Option<f64>, r: f64, w: f64) -> Result<Self> {
        let beta = (p.n as f64 - 1.0) / p.n as f64;
        let mut iso = Self {
            p0: p.p0,
            s_minus: p.s_minus,
            s_plus: p.s_plus,
            k,
            c0: 0.0,
            r,
            vm: p.vm,
            half_width: w,
            n: p.n,
            tails: true,
            left: None,
            right: None,
            reference: Vec::new(),
        };
        let (yl, ml) = iso.central(p.vm - w, Side::Left);
        let (yr, mr) = iso.central(p.vm + w, Side::Right);
        if yl <= 0.0 || yr <= 0.0 {
            return Err(Error::NotPositive {
                v: if yl <= 0.0 { p.vm - w } else { p.vm + w },
                value: yl.min(yr),
            });
        }
        // Default tail constant: half the power law through the nearer
        // central end value, so the tails sit well below the cone.
        let c0 = c0.unwrap_or_else(|| 0.5 * (yl / (p.vm - w).powf(beta)).min(yr / (1.0 - p.vm - w).powf(beta)));
        iso.c0 = c0;
        let tail_y = c0 * r.powf(beta);
        let tail_m = c0 * beta * r.powf(beta - 1.0);
        iso.left = Some(Hermite::log_blend(r, p.vm - w, tail_y, yl, tail_m, ml));
        iso.right = Some(Hermite::log_blend(p.vm + w, 1.0 - r, yr, tail_y, mr, -tail_m));
        Ok(iso)
    }

    /// Smallest value on a uniform sampling of (0, 1).
    fn min_on_samples(&self, count: usize) -> (f64, f64) {
        let mut best = (f64::INFINITY, 0.0);
        for i in 1..count {
            let v = i as f64 / count as f64;
            let y = self.value(v);
            if y < best.0 {
                best = (y, v);
            }
        }
        best
    }

    /// Largest excess `𝓘(v) - ref(v)` over the stored reference samples.
    pub fn domination_excess(&self) -> f64 {
        self.reference
            .iter()
            .map(|&(v, y)| self.value(v) - y)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

const K_CAP: f64 = 1e6;

fn windows(p: &TouchingParams) -> Result<(f64, f64)> {
    // Keep the cone within a quarter of P0 of the anchor value.
    let steep = p.s_minus.abs().max(p.s_plus.abs());
    let w = p
        .half_width
        .unwrap_or_else(|| 0.1f64.min(p.vm / 3.0).min((1.0 - p.vm) / 3.0).min(0.25 * p.p0 / steep.max(1e-300)));
    let r = p.r.unwrap_or_else(|| 0.05f64.min((p.vm - w) / 2.0).min((1.0 - p.vm - w) / 2.0));
    if !(w > 0.0 && r > 0.0 && r < p.vm - w && p.vm + w < 1.0 - r) {
        return Err(Error::InvalidParameter(format!("windows r = {r}, w = {w} do not fit around v_m = {}", p.vm)));
    }
    Ok((r, w))
}

/// The construction at a fixed quadratic drop `k`, without any reference.
pub fn build_with_drop(p: &TouchingParams, k: f64) -> Result<TouchingIso> {
    let (r, w) = windows(p)?;
    TouchingIso::assemble(p, k, p.c0, r, w)
}

const DOMINATION_SLACK: f64 = 1e-12;

/// Builds the touching surrogate, raising the quadratic drop `K`
/// (0, 1, 2, 4, …, capped at 1e6) until `𝓘` lies below every reference sample.
pub fn build_touching_iso(p: &TouchingParams, reference: &[(f64, f64)]) -> Result<TouchingIso> {
    if !(p.p0 > 0.0 && p.p0.is_finite()) {
        return Err(Error::InvalidParameter(format!("anchor value must be positive, got {}", p.p0)));
    }
    if p.s_minus < p.s_plus {
        return Err(Error::InvalidParameter(format!(
            "one-sided slopes must satisfy s- >= s+ (got {} < {})",
            p.s_minus, p.s_plus
        )));
    }
    if !(p.vm > 0.0 && p.vm < 1.0) {
        return Err(Error::InvalidParameter(format!("anchor volume {} outside (0,1)", p.vm)));
    }
    if p.n < 2 {
        return Err(Error::InvalidParameter("dimension must be at least 2".into()));
    }
    for &(v, y) in reference {
        if (v - p.vm).abs() <= 1e-12 && y < p.p0 - DOMINATION_SLACK {
            return Err(Error::AnchorNotMinimal {
                v,
                reference: y,
                p0: p.p0,
            });
        }
    }
    let (r, w) = windows(p)?;
    let mut k = 0.0;
    let mut last_excess;
    loop {
        match TouchingIso::assemble(p, k, p.c0, r, w) {
            Ok(mut iso) => {
                iso.reference = reference.to_vec();
                let (lo, at) = iso.min_on_samples(4000);
                if lo <= 0.0 {
                    return Err(Error::NotPositive { v: at, value: lo });
                }
                let excess = iso.domination_excess();
                if reference.is_empty() || excess <= DOMINATION_SLACK {
                    return Ok(iso);
                }
                last_excess = excess;
            }
            Err(Error::NotPositive { v, value }) => {
                return Err(Error::Domination {
                    cap: k,
                    detail: format!("cone became non-positive at v = {v} ({value}) before dominating"),
                });
            }
            Err(e) => return Err(e),
        }
        k = if k == 0.0 { 1.0 } else { 2.0 * k };
        if k > K_CAP {
            return Err(Error::Domination {
                cap: K_CAP,
                detail: format!("largest excess over reference {last_excess:e}"),
            });
        }
    }
}
