//! Double-well potentials and a numerical validator for the well hypotheses.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::numerics::bisect;
use crate::numerics::extrapolate::richardson;
use crate::report::ValidationReport;
use crate::{Error, Result};

type Scalar = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Quartic,
    /// `(s²−1)²(1 + β arctan s)`.
    Asymmetric(f64),
    /// `|s²−1|^{q+1}`.
    Degenerate(f64),
    /// `(s²−1)²(1 + β h(s))` with `h(s) = s(s²−1)/(1+s²)^{3/2}`; the factor is
    /// 1 at both wells, so the curvature there is the same as the quartic's.
    Skewed(f64),
    /// `W(a+b−s)` of the inner potential.
    Reflected(Box<Potential>),
    Custom { w: Scalar, dw: Scalar, d2w: Scalar },
}

/// A double-well potential together with its well data.
#[derive(Clone)]
pub struct Potential {
    name: String,
    kind: Kind,
    pub a: f64,
    pub b: f64,
    /// Central critical point, `W'(c) = 0` with `a < c < b`.
    pub c: f64,
    /// Exponent in `W''(s) ~ ℓ |s − a|^{q−1}`.
    pub q: f64,
    /// Declared well limit at `a`.
    pub ell_a: f64,
    /// Declared well limit at `b`.
    pub ell_b: f64,
    pub symmetric: bool,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential")
            .field("name", &self.name)
            .field("a", &self.a)
            .field("b", &self.b)
            .field("c", &self.c)
            .field("q", &self.q)
            .field("ell_a", &self.ell_a)
            .field("ell_b", &self.ell_b)
            .finish()
    }
}

pub fn make_quartic() -> Potential {
    Potential {
        name: "quartic".into(),
        kind: Kind::Quartic,
        a: -1.0,
        b: 1.0,
        c: 0.0,
        q: 1.0,
        ell_a: 8.0,
        ell_b: 8.0,
        symmetric: true,
    }
}

pub fn make_asymmetric(beta: f64) -> Result<Potential> {
    if !(beta.abs() < 2.0 / PI) {
        return Err(Error::InvalidParameter(format!(
            "asymmetric potential needs |beta| < 2/pi so that 1 + beta*atan(s) > 0 (got {beta})"
        )));
    }
    if beta == 0.0 {
        let mut p = make_quartic();
        p.kind = Kind::Asymmetric(0.0);
        p.name = "asymmetric(0)".into();
        return Ok(p);
    }
    let mut p = Potential {
        name: format!("asymmetric({beta})"),
        kind: Kind::Asymmetric(beta),
        a: -1.0,
        b: 1.0,
        c: 0.0,
        q: 1.0,
        ell_a: 8.0 * (1.0 - beta * PI / 4.0),
        ell_b: 8.0 * (1.0 + beta * PI / 4.0),
        symmetric: false,
    };
    p.c = p.locate_center()?;
    Ok(p)
}

pub fn make_degenerate(q: f64) -> Result<Potential> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "degenerate potential needs q in (0, 1), got {q}"
        )));
    }
    let ell = q * (q + 1.0) * 2f64.powf(q + 1.0);
    Ok(Potential {
        name: format!("degenerate({q})"),
        kind: Kind::Degenerate(q),
        a: -1.0,
        b: 1.0,
        c: 0.0,
        q,
        ell_a: ell,
        ell_b: ell,
        symmetric: true,
    })
}

/// Asymmetric double well whose wells keep `W''(±1) = 8`.
pub fn make_skewed(beta: f64) -> Result<Potential> {
    if !(beta.abs() < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "skewed potential needs |beta| < 1 for positivity (got {beta})"
        )));
    }
    let mut p = Potential {
        name: format!("skewed({beta})"),
        kind: Kind::Skewed(beta),
        a: -1.0,
        b: 1.0,
        c: 0.0,
        q: 1.0,
        ell_a: 8.0,
        ell_b: 8.0,
        symmetric: beta == 0.0,
    };
    p.c = p.locate_center()?;
    Ok(p)
}

impl Potential {
    /// A potential from closed-form evaluators. The central point is located
    /// by bisection of `W'` on `(a, b)`.
    #[allow(clippy::too_many_arguments)]
    pub fn custom(
        name: impl Into<String>,
        w: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dw: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2w: impl Fn(f64) -> f64 + Send + Sync + 'static,
        a: f64,
        b: f64,
        q: f64,
        ell: f64,
    ) -> Result<Potential> {
        if !(a < b) {
            return Err(Error::InvalidParameter(format!("wells must satisfy a < b (got {a}, {b})")));
        }
        let mut p = Potential {
            name: name.into(),
            kind: Kind::Custom {
                w: Arc::new(w),
                dw: Arc::new(dw),
                d2w: Arc::new(d2w),
            },
            a,
            b,
            c: 0.5 * (a + b),
            q,
            ell_a: ell,
            ell_b: ell,
            symmetric: false,
        };
        p.c = p.locate_center()?;
        Ok(p)
    }

    /// The potential `s ↦ W(a + b − s)`, which swaps the roles of the wells.
    pub fn reflected(&self) -> Potential {
        Potential {
            name: format!("reflect({})", self.name),
            kind: Kind::Reflected(Box::new(self.clone())),
            a: self.a,
            b: self.b,
            c: self.a + self.b - self.c,
            q: self.q,
            ell_a: self.ell_b,
            ell_b: self.ell_a,
            symmetric: self.symmetric,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    fn locate_center(&self) -> Result<f64> {
        let span = self.b - self.a;
        let lo = self.a + 1e-6 * span;
        let hi = self.b - 1e-6 * span;
        // First sign change of W' strictly inside (a, b).
        let n = 2000;
        let mut prev = self.dw(lo);
        for i in 1..=n {
            let s = lo + (hi - lo) * i as f64 / n as f64;
            let cur = self.dw(s);
            if cur == 0.0 || prev.signum() != cur.signum() {
                let s0 = lo + (hi - lo) * (i - 1) as f64 / n as f64;
                return bisect(|x| self.dw(x), s0, s, 1e-15);
            }
            prev = cur;
        }
        Err(Error::NoBracket {
            lo,
            hi,
            context: "W' has no interior zero between the wells".into(),
        })
    }

    pub fn w(&self, s: f64) -> f64 {
        match &self.kind {
            Kind::Quartic => {
                let u = s * s - 1.0;
                u * u
            }
            Kind::Asymmetric(beta) => {
                let u = s * s - 1.0;
                u * u * (1.0 + beta * s.atan())
            }
            Kind::Degenerate(q) => (s * s - 1.0).abs().powf(q + 1.0),
            Kind::Skewed(beta) => {
                let u = s * s - 1.0;
                u * u * (1.0 + beta * skew_h(s).0)
            }
            Kind::Reflected(inner) => inner.w(self.a + self.b - s),
            Kind::Custom { w, .. } => w(s),
        }
    }

    pub fn dw(&self, s: f64) -> f64 {
        match &self.kind {
            Kind::Quartic => 4.0 * s * (s * s - 1.0),
            Kind::Asymmetric(beta) => {
                let u = s * s - 1.0;
                let g = 1.0 + beta * s.atan();
                4.0 * s * u * g + u * u * beta / (1.0 + s * s)
            }
            Kind::Degenerate(q) => {
                let u = s * s - 1.0;
                2.0 * (q + 1.0) * s * u.abs().powf(*q) * u.signum()
            }
            Kind::Skewed(beta) => {
                let u = s * s - 1.0;
                let (h, h1, _) = skew_h(s);
                4.0 * s * u * (1.0 + beta * h) + u * u * beta * h1
            }
            Kind::Reflected(inner) => -inner.dw(self.a + self.b - s),
            Kind::Custom { dw, .. } => dw(s),
        }
    }

    pub fn d2w(&self, s: f64) -> f64 {
        match &self.kind {
            Kind::Quartic => 12.0 * s * s - 4.0,
            Kind::Asymmetric(beta) => {
                let u = s * s - 1.0;
                let g = 1.0 + beta * s.atan();
                let g1 = beta / (1.0 + s * s);
                let g2 = -2.0 * beta * s / ((1.0 + s * s) * (1.0 + s * s));
                (12.0 * s * s - 4.0) * g + 8.0 * s * u * g1 + u * u * g2
            }
            Kind::Degenerate(q) => {
                let u = s * s - 1.0;
                if u == 0.0 {
                    // Infinite for q < 1; the limit from either side.
                    return f64::INFINITY;
                }
                let au = u.abs();
                2.0 * (q + 1.0) * (au.powf(*q) * u.signum() + 2.0 * q * s * s * au.powf(q - 1.0))
            }
            Kind::Skewed(beta) => {
                let u = s * s - 1.0;
                let (h, h1, h2) = skew_h(s);
                (12.0 * s * s - 4.0) * (1.0 + beta * h) + 8.0 * s * u * beta * h1 + u * u * beta * h2
            }
            Kind::Reflected(inner) => inner.d2w(self.a + self.b - s),
            Kind::Custom { d2w, .. } => d2w(s),
        }
    }

    /// `√W(s)`, evaluated in factored form where possible so that it is
    /// accurate close to the wells.
    pub fn sqrt_w(&self, s: f64) -> f64 {
        match &self.kind {
            Kind::Quartic => (1.0 - s * s).abs(),
            Kind::Asymmetric(beta) => (1.0 - s * s).abs() * (1.0 + beta * s.atan()).sqrt(),
            Kind::Degenerate(q) => (s * s - 1.0).abs().powf(0.5 * (q + 1.0)),
            Kind::Skewed(beta) => (1.0 - s * s).abs() * (1.0 + beta * skew_h(s).0).sqrt(),
            Kind::Reflected(inner) => inner.sqrt_w(self.a + self.b - s),
            Kind::Custom { w, .. } => w(s).max(0.0).sqrt(),
        }
    }

    /// `√W(a + d)` evaluated from the offset `d`, for potentials where this
    /// avoids the cancellation in `a + d`.
    pub fn sqrt_w_near_a(&self, d: f64) -> Option<f64> {
        match &self.kind {
            Kind::Degenerate(q) => Some((d * (2.0 - d)).abs().powf(0.5 * (q + 1.0))),
            Kind::Reflected(inner) => inner.sqrt_w_near_b(d),
            _ => None,
        }
    }

    /// `√W(b − d)`, see [`Potential::sqrt_w_near_a`].
    pub fn sqrt_w_near_b(&self, d: f64) -> Option<f64> {
        match &self.kind {
            Kind::Degenerate(q) => Some((d * (2.0 - d)).abs().powf(0.5 * (q + 1.0))),
            Kind::Reflected(inner) => inner.sqrt_w_near_a(d),
            _ => None,
        }
    }

    /// `W''` at the well `a` (the `q = 1` curvature), `None` for degenerate wells.
    pub fn w2_a(&self) -> Option<f64> {
        (self.q == 1.0).then_some(self.ell_a)
    }

    pub fn w2_b(&self) -> Option<f64> {
        (self.q == 1.0).then_some(self.ell_b)
    }
}

/// `h(s) = s(s²−1)(1+s²)^{−3/2}` with its first two derivatives.
fn skew_h(s: f64) -> (f64, f64, f64) {
    let r = 1.0 + s * s;
    let h = s * (s * s - 1.0) / r.powf(1.5);
    let h1 = (5.0 * s * s - 1.0) / r.powf(2.5);
    let h2 = 15.0 * s * (1.0 - s * s) / r.powf(3.5);
    (h, h1, h2)
}

/// Sampling parameters for [`validate_potential`].
#[derive(Debug, Clone, Copy)]
pub struct ValidationTolerances {
    /// Number of uniform sample points on `[a − margin, b + margin]`.
    pub grid_points: usize,
    pub margin: f64,
    /// Relative tolerance on the extrapolated well limits.
    pub ell_rel_tol: f64,
    /// Absolute tolerance for identifying numerical zeros with the wells.
    pub location_tol: f64,
    /// Outer radius of the far-field `|W'|` check.
    pub far_field: f64,
}

impl Default for ValidationTolerances {
    fn default() -> Self {
        Self {
            grid_points: 10_000,
            margin: 2.0,
            ell_rel_tol: 1e-4,
            location_tol: 1e-8,
            far_field: 50.0,
        }
    }
}

/// Checks the double-well hypotheses numerically. Every check is reported;
/// non-finite evaluations become failures rather than panics.
pub fn validate_potential(p: &Potential, tol: ValidationTolerances) -> ValidationReport {
    let mut rep = ValidationReport::new();
    let (a, b) = (p.a, p.b);
    let lo = a - tol.margin;
    let hi = b + tol.margin;
    let n = tol.grid_points.max(10);
    let grid: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let ws: Vec<f64> = grid.iter().map(|&s| p.w(s)).collect();
    let dws: Vec<f64> = grid.iter().map(|&s| p.dw(s)).collect();

    let bad = grid
        .iter()
        .zip(ws.iter().zip(&dws))
        .find(|(_, (w, d))| !w.is_finite() || !d.is_finite());
    if let Some((s, _)) = bad {
        rep.push("finite", false, Some(*s), format!("non-finite W or W' at s = {s}"));
        return rep;
    }
    rep.push("finite", true, None, format!("{n} samples on [{lo}, {hi}]"));

    // Critical points of W from sign changes of W'.
    let crit = sign_change_roots(p, &grid, &dws);
    let scale = ws.iter().cloned().fold(0.0, f64::max).max(1.0);
    let zeros: Vec<f64> = crit
        .iter()
        .copied()
        .filter(|&s| p.w(s).abs() <= 1e-12 * scale)
        .collect();
    let negative = ws.iter().zip(&grid).find(|(w, _)| **w < 0.0);
    let two_zeros = zeros.len() == 2
        && (zeros[0] - a).abs() <= tol.location_tol
        && (zeros[1] - b).abs() <= tol.location_tol
        && negative.is_none();
    rep.push(
        "two_zeros",
        two_zeros,
        Some(zeros.len() as f64),
        format!("zeros of W at {zeros:?}; expected exactly [{a}, {b}]"),
    );

    let positive_elsewhere = grid
        .iter()
        .zip(&ws)
        .filter(|(s, _)| (**s - a).abs() > 1e-3 && (**s - b).abs() > 1e-3)
        .all(|(_, w)| *w > 0.0);
    rep.push("positive_off_wells", positive_elsewhere, None, "W > 0 away from the wells");

    let three_crit = crit.len() == 3
        && (crit[0] - a).abs() <= tol.location_tol
        && (crit[2] - b).abs() <= tol.location_tol
        && crit[1] > a
        && crit[1] < b;
    let c_meas = if crit.len() == 3 { crit[1] } else { f64::NAN };
    let concave = three_crit && p.d2w(c_meas) < 0.0;
    rep.push(
        "three_critical_points",
        three_crit,
        Some(c_meas),
        format!("zeros of W' at {crit:?}"),
    );
    rep.push(
        "central_maximum",
        concave,
        Some(if c_meas.is_finite() { p.d2w(c_meas) } else { f64::NAN }),
        "W''(c) < 0",
    );
    // Sign pattern -, +, -, + of W' across the critical points.
    let pattern = three_crit && {
        let probe = |s: f64| p.dw(s);
        probe(a - 0.5) < 0.0
            && probe(0.5 * (a + c_meas)) > 0.0
            && probe(0.5 * (c_meas + b)) < 0.0
            && probe(b + 0.5) > 0.0
    };
    rep.push("derivative_sign_pattern", pattern, None, "W' signs -,+,-,+");

    // Well limits: W''(s)/|s − well|^{q−1} at s = well ± 10^-k, extrapolated.
    for (well, ell, label) in [(a, p.ell_a, "a"), (b, p.ell_b, "b")] {
        for (side, sgn) in [("inner", if well == a { 1.0 } else { -1.0 }), ("outer", if well == a { -1.0 } else { 1.0 })]
        {
            let vals: Vec<f64> = (2..=6)
                .map(|k| {
                    let d = 10f64.powi(-k);
                    p.d2w(well + sgn * d) / d.powf(p.q - 1.0)
                })
                .collect();
            let est = richardson(&vals, 10.0, 1);
            let ok = est.is_finite() && ((est - ell) / ell).abs() <= tol.ell_rel_tol;
            rep.push(
                format!("well_limit_{label}_{side}"),
                ok,
                Some(est),
                format!("declared {ell}, q = {}", p.q),
            );
        }
    }

    // Exponent from the log-log slope of W near each well.
    for (well, sgn, label) in [(a, 1.0, "a"), (b, -1.0, "b")] {
        let d1: f64 = 1e-4;
        let d2: f64 = 1e-5;
        let w1 = p.w(well + sgn * d1);
        let w2 = p.w(well + sgn * d2);
        let slope = (w1.ln() - w2.ln()) / (d1.ln() - d2.ln());
        let q_est = slope - 1.0;
        let ok = (q_est - p.q).abs() <= 1e-3;
        rep.push(format!("exponent_{label}"), ok, Some(q_est), format!("declared q = {}", p.q));
    }

    // Far-field: |W'| bounded away from zero outside a large interval.
    let m = 4000;
    let mut min_dw = f64::INFINITY;
    for i in 0..=m {
        let t = i as f64 / m as f64;
        let r = tol.margin + t * (tol.far_field - tol.margin);
        min_dw = min_dw.min(p.dw(b + r).abs()).min(p.dw(a - r).abs());
    }
    rep.push(
        "far_field_slope",
        min_dw.is_finite() && min_dw > 0.0,
        Some(min_dw),
        format!("min |W'| on [{}, {}] beyond each well", tol.margin, tol.far_field),
    );
    rep
}

fn sign_change_roots(p: &Potential, grid: &[f64], vals: &[f64]) -> Vec<f64> {
    let mut roots: Vec<f64> = Vec::new();
    let push = |r: f64, roots: &mut Vec<f64>| {
        if roots.last().map_or(true, |&l| (r - l).abs() > 1e-9) {
            roots.push(r);
        }
    };
    for i in 0..grid.len() {
        if vals[i] == 0.0 {
            push(grid[i], &mut roots);
            continue;
        }
        if i + 1 < grid.len() && vals[i + 1] != 0.0 && vals[i].signum() != vals[i + 1].signum() {
            if let Ok(r) = bisect(|s| p.dw(s), grid[i], grid[i + 1], 1e-12) {
                push(r, &mut roots);
            }
        }
    }
    roots
}
