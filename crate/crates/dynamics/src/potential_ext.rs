//! Potential restricted to an invariant box and extended quadratically
//! outside it, so `W''` is bounded on all of ℝ.

use gammalab_core::Potential;
use serde::Serialize;

#[derive(Debug, Clone)]
pub struct BoxedPotential {
    pub inner: Potential,
    pub lo: f64,
    pub hi: f64,
    /// `sup W''` over ℝ (attained on the box).
    pub lipschitz: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GrowthCheck {
    pub p: f64,
    /// Least `C₁` with `|W'(s)| ≤ C₁|s|^p + C₁` on the sampled range.
    pub c1: f64,
    pub range: f64,
}

impl BoxedPotential {
    /// Box `[a − 0.2(b−a), b + 0.2(b−a)]`.
    pub fn new(inner: Potential) -> Self {
        let pad = 0.2 * (inner.b - inner.a);
        let (lo, hi) = (inner.a - pad, inner.b + pad);
        let lipschitz = (0..=4000)
            .map(|k| inner.d2w(lo + (hi - lo) * k as f64 / 4000.0))
            .fold(f64::NEG_INFINITY, f64::max);
        Self {
            inner,
            lo,
            hi,
            lipschitz,
        }
    }

    pub fn a(&self) -> f64 {
        self.inner.a
    }

    pub fn b(&self) -> f64 {
        self.inner.b
    }

    fn edge(&self, s: f64) -> Option<f64> {
        if s < self.lo {
            Some(self.lo)
        } else if s > self.hi {
            Some(self.hi)
        } else {
            None
        }
    }

    pub fn w(&self, s: f64) -> f64 {
        match self.edge(s) {
            None => self.inner.w(s),
            Some(e) => {
                let d = s - e;
                self.inner.w(e) + self.inner.dw(e) * d + 0.5 * self.inner.d2w(e) * d * d
            }
        }
    }

    pub fn dw(&self, s: f64) -> f64 {
        match self.edge(s) {
            None => self.inner.dw(s),
            Some(e) => self.inner.dw(e) + self.inner.d2w(e) * (s - e),
        }
    }

    pub fn d2w(&self, s: f64) -> f64 {
        self.inner.d2w(self.edge(s).unwrap_or(s))
    }

    /// Fits the growth condition with exponent `p` on `[−range, range]`.
    pub fn growth_check(&self, p: f64, range: f64) -> GrowthCheck {
        let c1 = (0..=2000)
            .map(|k| {
                let s = -range + 2.0 * range * k as f64 / 2000.0;
                self.dw(s).abs() / (s.abs().powf(p) + 1.0)
            })
            .fold(0.0, f64::max);
        GrowthCheck { p, c1, range }
    }
}
