//! The weight `η = 𝓘 ∘ V` on `(A, B)`, where `V' = 𝓘(V)`, `V(0) = v_m`.

use crate::error::{Error, Result};
use crate::iso::{Side, TouchingIso};
use gammalab_core::numerics::quad::integrate_with_breaks;
use gammalab_core::numerics::{gauss::gl10, Dopri5, QuadOptions};
use gammalab_core::ValidationReport;
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

/// Solution of `V' = 𝓘(V)` as a quintic Hermite table between the two
/// closed-form power tails.
#[derive(Debug, Clone)]
pub struct VTable {
    /// Left endpoint `A`, where `V = 0`.
    pub a: f64,
    /// Right endpoint `B`, where `V = 1`.
    pub b: f64,
    t: Vec<f64>,
    v: Vec<f64>,
    d1: Vec<f64>,
    d2_left: Vec<f64>,
    d2_right: Vec<f64>,
    iso: TouchingIso,
    /// Times at which `V` meets the breakpoints of `𝓘` (ascending).
    pub t_breaks: Vec<f64>,
}

impl VTable {
    fn tail_coeff(&self) -> f64 {
        (1.0 - self.iso.beta()) * self.iso.c0
    }

    pub fn eval(&self, t: f64) -> f64 {
        let iso = &self.iso;
        if !iso.tails {
            return (iso.vm + iso.p0 * t).clamp(0.0, 1.0);
        }
        let e = 1.0 / (1.0 - iso.beta());
        if t <= self.t[0] {
            return (self.tail_coeff() * (t - self.a)).max(0.0).powf(e);
        }
        let last = self.t.len() - 1;
        if t >= self.t[last] {
            return 1.0 - (self.tail_coeff() * (self.b - t)).max(0.0).powf(e);
        }
        let j = self.t.partition_point(|&x| x <= t).saturating_sub(1).min(last - 1);
        let h = self.t[j + 1] - self.t[j];
        let s = (t - self.t[j]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let s4 = s3 * s;
        let s5 = s4 * s;
        let h0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
        let h1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
        let h2 = 0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5);
        let h3 = 0.5 * (s3 - 2.0 * s4 + s5);
        let h4 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
        let h5 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
        h0 * self.v[j]
            + h * h1 * self.d1[j]
            + h * h * h2 * self.d2_right[j]
            + h5 * self.v[j + 1]
            + h * h4 * self.d1[j + 1]
            + h * h * h3 * self.d2_left[j + 1]
    }

    pub fn iso(&self) -> &TouchingIso {
        &self.iso
    }

    /// Table nodes `(t, V)`.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.t.iter().copied().zip(self.v.iter().copied())
    }
}

/// Integrates `V' = 𝓘(V)` in both directions from `V(0) = v_m`, stopping at
/// every breakpoint of `𝓘`, and closes the ends with the exact power tails.
pub fn solve_v(iso: &TouchingIso) -> Result<VTable> {
    if !iso.tails {
        if iso.p0 <= 0.0 {
            return Err(Error::NotPositive { v: iso.vm, value: iso.p0 });
        }
        return Ok(VTable {
            a: -iso.vm / iso.p0,
            b: (1.0 - iso.vm) / iso.p0,
            t: vec![],
            v: vec![],
            d1: vec![],
            d2_left: vec![],
            d2_right: vec![],
            iso: iso.clone(),
            t_breaks: vec![0.0],
        });
    }
    let beta = iso.beta();
    if beta >= 1.0 {
        return Err(Error::NonIntegrableTail { exponent: beta });
    }
    let ode = Dopri5 {
        rtol: 1e-13,
        atol: 1e-15,
        h_max: 4e-3,
        ..Dopri5::default()
    };
    let w = iso.half_width;
    // Forward through the right half, backward through the left.
    let mut fwd = vec![(0.0, iso.vm)];
    let mut breaks_fwd = vec![];
    for level in [iso.vm + w, 1.0 - iso.r] {
        let (t0, v0) = *fwd.last().unwrap();
        let steps = ode.solve_to_level(|_, v| iso.eval_side(v, Side::Right).0, t0, v0, level, t0 + 1e3, 1e-15)?;
        fwd.extend(steps.iter().skip(1).map(|s| (s.t, s.y)));
        breaks_fwd.push(fwd.last().unwrap().0);
    }
    let mut bwd = vec![(0.0, iso.vm)];
    let mut breaks_bwd = vec![];
    for level in [iso.vm - w, iso.r] {
        let (t0, v0) = *bwd.last().unwrap();
        let steps = ode.solve_to_level(|_, v| iso.eval_side(v, Side::Left).0, t0, v0, level, t0 - 1e3, 1e-15)?;
        bwd.extend(steps.iter().skip(1).map(|s| (s.t, s.y)));
        breaks_bwd.push(bwd.last().unwrap().0);
    }
    let mut nodes: Vec<(f64, f64)> = bwd.into_iter().rev().collect();
    nodes.extend(fwd.into_iter().skip(1));
    let mut table = VTable {
        a: 0.0,
        b: 0.0,
        t: Vec::with_capacity(nodes.len()),
        v: Vec::with_capacity(nodes.len()),
        d1: Vec::with_capacity(nodes.len()),
        d2_left: Vec::with_capacity(nodes.len()),
        d2_right: Vec::with_capacity(nodes.len()),
        iso: iso.clone(),
        t_breaks: vec![],
    };
    // Snap the end levels exactly so the tails join continuously.
    let last = nodes.len() - 1;
    nodes[0].1 = iso.r;
    nodes[last].1 = 1.0 - iso.r;
    for &(t, v) in &nodes {
        let (fl, dl) = iso.eval_side(v, Side::Left);
        let (fr, dr) = iso.eval_side(v, Side::Right);
        // Left of t = 0 the solution lives on the left branch of the kink.
        let (f, d2l, d2r) = if t < 0.0 {
            (fl, dl * fl, dl * fl)
        } else if t > 0.0 {
            (fr, dr * fr, dr * fr)
        } else {
            (fr, dl * fl, dr * fr)
        };
        table.t.push(t);
        table.v.push(v);
        table.d1.push(f);
        table.d2_left.push(d2l);
        table.d2_right.push(d2r);
    }
    let k = table.tail_coeff();
    let tail_len = iso.r.powf(1.0 - beta) / k;
    table.a = table.t[0] - tail_len;
    table.b = table.t[last] + tail_len;
    let mut tb: Vec<f64> = breaks_bwd.into_iter().rev().collect();
    tb.push(0.0);
    tb.extend(breaks_fwd);
    table.t_breaks = tb;
    Ok(table)
}

type EtaFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type DetaFn = Arc<dyn Fn(f64, Side) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Repr {
    Composed(VTable),
    Flat(f64),
    Custom { eta: EtaFn, deta: DetaFn, breaks: Vec<f64> },
}

/// Fitted constants of the endpoint and derivative hypotheses.
#[derive(Debug, Clone, Copy, Serialize, Default)]
pub struct EtaConstants {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
    pub d5: f64,
    pub t_star: f64,
    /// Fitted log–log slopes of `η` at `A` and at `B`.
    pub slope_a: f64,
    pub slope_b: f64,
}

/// A weight `η` on `(A, B)` with a (possible) kink at `t0`.
#[derive(Clone)]
pub struct WeightFunction {
    pub a: f64,
    pub b: f64,
    pub t0: f64,
    /// `∫_A^{t0} η`.
    pub vm: f64,
    pub n: u32,
    pub eta0: f64,
    pub deta_minus: f64,
    pub deta_plus: f64,
    /// Power `p` with `η ≍ (t-A)^p` near `A` (and mirrored at `B`).
    pub endpoint_exponent: f64,
    pub constants: EtaConstants,
    repr: Repr,
}

impl fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightFunction")
            .field("a", &self.a)
            .field("b", &self.b)
            .field("t0", &self.t0)
            .field("vm", &self.vm)
            .field("eta0", &self.eta0)
            .field("deta_minus", &self.deta_minus)
            .field("deta_plus", &self.deta_plus)
            .field("endpoint_exponent", &self.endpoint_exponent)
            .finish_non_exhaustive()
    }
}

impl WeightFunction {
    /// `η ≡ level` on `(-vm/level, (1-vm)/level)`, total mass one.
    pub fn flat(level: f64, vm: f64) -> Result<Self> {
        if !(level > 0.0) || !(vm > 0.0 && vm < 1.0) {
            return Err(Error::InvalidParameter("flat weight needs level > 0 and vm in (0,1)".into()));
        }
        let mut w = Self {
            a: -vm / level,
            b: (1.0 - vm) / level,
            t0: 0.0,
            vm,
            n: 2,
            eta0: level,
            deta_minus: 0.0,
            deta_plus: 0.0,
            endpoint_exponent: 0.0,
            constants: EtaConstants::default(),
            repr: Repr::Flat(level),
        };
        w.constants = fit_constants(&w);
        Ok(w)
    }

    /// A hand-specified weight; `deta` gives one-sided derivatives and
    /// `endpoint_exponent` the claimed decay power at both ends.
    pub fn custom<E, D>(a: f64, b: f64, t0: f64, n: u32, endpoint_exponent: f64, eta: E, deta: D) -> Result<Self>
    where
        E: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64, Side) -> f64 + Send + Sync + 'static,
    {
        if !(a < t0 && t0 < b) {
            return Err(Error::InvalidParameter(format!("need A < t0 < B, got {a}, {t0}, {b}")));
        }
        let eta: EtaFn = Arc::new(eta);
        let deta: DetaFn = Arc::new(deta);
        let mut w = Self {
            a,
            b,
            t0,
            vm: 0.0,
            n,
            eta0: eta(t0),
            deta_minus: deta(t0, Side::Left),
            deta_plus: deta(t0, Side::Right),
            endpoint_exponent,
            constants: EtaConstants::default(),
            repr: Repr::Custom {
                eta,
                deta,
                breaks: vec![t0],
            },
        };
        w.vm = w.quad_mass(a, t0)?;
        w.constants = fit_constants(&w);
        Ok(w)
    }

    pub fn eta(&self, t: f64) -> f64 {
        match &self.repr {
            Repr::Flat(c) => *c,
            Repr::Composed(tab) => tab.iso.value(tab.eval(t)),
            Repr::Custom { eta, .. } => eta(t),
        }
    }

    /// One-sided derivative; `side` only matters at `t0` (or other kinks).
    pub fn deta_side(&self, t: f64, side: Side) -> f64 {
        match &self.repr {
            Repr::Flat(_) => 0.0,
            Repr::Composed(tab) => {
                let v = tab.eval(t);
                let s = if t < self.t0 || (t == self.t0 && side == Side::Left) { Side::Left } else { Side::Right };
                let (f, d) = tab.iso.eval_side(v, s);
                d * f
            }
            Repr::Custom { deta, .. } => deta(t, side),
        }
    }

    pub fn deta(&self, t: f64) -> f64 {
        self.deta_side(t, Side::Right)
    }

    /// The cumulative mass `∫_A^t η`.
    pub fn mass_below(&self, t: f64) -> f64 {
        match &self.repr {
            Repr::Flat(c) => c * (t.clamp(self.a, self.b) - self.a),
            Repr::Composed(tab) => tab.eval(t),
            Repr::Custom { .. } => self.quad_mass(self.a, t).unwrap_or(f64::NAN),
        }
    }

    /// `∫_{t1}^{t2} η`, exact for composed and flat weights.
    pub fn mass_between(&self, t1: f64, t2: f64) -> f64 {
        match &self.repr {
            Repr::Flat(c) => c * (t2 - t1),
            Repr::Composed(tab) => tab.eval(t2) - tab.eval(t1),
            Repr::Custom { eta, .. } => gl10().integrate(|t| eta(t), t1, t2),
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.mass_between(self.a, self.b)
    }

    /// Points of reduced smoothness inside `(A, B)`.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Flat(_) => vec![self.t0],
            Repr::Composed(tab) => tab.t_breaks.clone(),
            Repr::Custom { breaks, .. } => breaks.clone(),
        }
    }

    /// The solved `V` behind a composed weight.
    pub fn v_table(&self) -> Option<&VTable> {
        match &self.repr {
            Repr::Composed(tab) => Some(tab),
            _ => None,
        }
    }

    /// Independent quadrature of `η` (used for the mass checks).
    pub fn quad_mass(&self, t1: f64, t2: f64) -> Result<f64> {
        let breaks: Vec<f64> = self.breakpoints().into_iter().filter(|&x| x > t1 && x < t2).collect();
        let r = integrate_with_breaks(|t| self.eta(t), t1, t2, &breaks, QuadOptions::abs(1e-13))?;
        Ok(r.value)
    }

    /// `η(t)` on a uniform sampling of `[A, B]` (for output).
    pub fn samples(&self, count: usize) -> Vec<(f64, f64)> {
        (0..=count)
            .map(|i| {
                let t = self.a + (self.b - self.a) * i as f64 / count as f64;
                (t, self.eta(t))
            })
            .collect()
    }
}

/// `η := 𝓘 ∘ V` with `t0 = 0`.
pub fn build_eta(iso: &TouchingIso, table: &VTable) -> WeightFunction {
    // V ∝ (t-A)^{1/(1-β)} under the tail 𝓘 = C0 v^β, so η ∝ (t-A)^{β/(1-β)}.
    let exponent = if iso.tails { iso.beta() / (1.0 - iso.beta()) } else { 0.0 };
    let mut w = WeightFunction {
        a: table.a,
        b: table.b,
        t0: 0.0,
        vm: iso.vm,
        n: iso.n,
        eta0: iso.p0,
        deta_minus: iso.deriv(iso.vm, Side::Left) * iso.p0,
        deta_plus: iso.deriv(iso.vm, Side::Right) * iso.p0,
        endpoint_exponent: exponent,
        constants: EtaConstants::default(),
        repr: if iso.tails { Repr::Composed(table.clone()) } else { Repr::Flat(iso.p0) },
    };
    w.constants = fit_constants(&w);
    w
}

/// Log-spaced distances `t* · 10^{-6 k / (n-1)}` used for the endpoint fits.
fn endpoint_offsets(t_star: f64) -> Vec<f64> {
    let n = 41;
    (0..n).map(|k| t_star * 10f64.powf(-6.0 * k as f64 / (n - 1) as f64)).collect()
}

fn slope_fit(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn default_t_star(w: &WeightFunction) -> f64 {
    if let Some(tab) = w.v_table() {
        let first = tab.t_breaks.first().copied().unwrap_or(w.t0);
        let last = tab.t_breaks.last().copied().unwrap_or(w.t0);
        (first - w.a).min(w.b - last)
    } else {
        0.05 * (w.t0 - w.a).min(w.b - w.t0)
    }
}

fn fit_constants(w: &WeightFunction) -> EtaConstants {
    let t_star = default_t_star(w);
    let p = w.endpoint_exponent;
    let offs = endpoint_offsets(t_star);
    let ya: Vec<f64> = offs.iter().map(|&d| w.eta(w.a + d)).collect();
    let yb: Vec<f64> = offs.iter().map(|&d| w.eta(w.b - d)).collect();
    let ratio = |ys: &[f64]| {
        let r: Vec<f64> = ys.iter().zip(&offs).map(|(y, d)| y / d.powf(p)).collect();
        (r.iter().copied().fold(f64::INFINITY, f64::min), r.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    };
    let (d1, d2) = ratio(&ya);
    let (d3, d4) = ratio(&yb);
    let positive = |ys: &[f64]| ys.iter().all(|&y| y > 0.0);
    let slope_a = if positive(&ya) { slope_fit(&offs, &ya) } else { f64::NAN };
    let slope_b = if positive(&yb) { slope_fit(&offs, &yb) } else { f64::NAN };
    let mut d5: f64 = 0.0;
    for t in interior_samples(w) {
        let e = w.eta(t);
        let dist = (t - w.a).min(w.b - t);
        d5 = d5.max(w.deta(t).abs() * dist / e);
    }
    EtaConstants {
        d1,
        d2,
        d3,
        d4,
        d5,
        t_star,
        slope_a,
        slope_b,
    }
}

fn interior_samples(w: &WeightFunction) -> Vec<f64> {
    let mut ts: Vec<f64> = (1..2000)
        .map(|i| w.a + (w.b - w.a) * i as f64 / 2000.0)
        .filter(|&t| t != w.t0)
        .collect();
    let t_star = default_t_star(w);
    for d in endpoint_offsets(t_star) {
        ts.push(w.a + d);
        ts.push(w.b - d);
    }
    ts
}

/// Tolerance on the fitted endpoint slope.
const SLOPE_TOL: f64 = 0.05;
/// Largest acceptable spread `d2/d1` of the fitted power-law bounds.
const SPREAD_TOL: f64 = 2.0;

/// Checks the five weight hypotheses on samples and reports the fitted constants.
pub fn validate_eta(w: &WeightFunction) -> ValidationReport {
    let mut rep = ValidationReport::new();
    let c = fit_constants(w);

    // (eta1): positivity, continuity at t0, one-sided C¹ at t0.
    let samples = interior_samples(w);
    let min_eta = samples.iter().map(|&t| w.eta(t)).fold(f64::INFINITY, f64::min);
    let finite = samples.iter().all(|&t| w.eta(t).is_finite() && w.deta(t).is_finite());
    rep.push(
        "eta1_positive",
        finite && min_eta > 0.0,
        Some(min_eta),
        format!("smallest sampled value over {} points", samples.len()),
    );
    let h = 1e-5 * (w.b - w.a);
    let e0 = w.eta(w.t0);
    let jump = (w.eta(w.t0 - 1e-3 * h) - e0).abs().max((w.eta(w.t0 + 1e-3 * h) - e0).abs());
    rep.push("eta1_continuous_at_t0", jump <= 1e-6 * (1.0 + e0), Some(jump), "|η(t0±δ) - η(t0)|");
    // Second-order one-sided differences.
    let fd_minus = (3.0 * e0 - 4.0 * w.eta(w.t0 - h) + w.eta(w.t0 - 2.0 * h)) / (2.0 * h);
    let fd_plus = (-3.0 * e0 + 4.0 * w.eta(w.t0 + h) - w.eta(w.t0 + 2.0 * h)) / (2.0 * h);
    let c1_err = (fd_minus - w.deta_minus).abs().max((fd_plus - w.deta_plus).abs());
    rep.push(
        "eta1_one_sided_c1",
        c1_err <= 1e-6 * (1.0 + w.deta_minus.abs().max(w.deta_plus.abs())),
        Some(c1_err),
        format!("finite differences {fd_minus:.9} / {fd_plus:.9} vs recorded {:.9} / {:.9}", w.deta_minus, w.deta_plus),
    );

    // (eta2)/(eta3): power-law decay at the ends.
    let p = w.endpoint_exponent;
    let nominal = (w.n as f64 - 1.0) / w.n as f64;
    for (name, slope, lo, hi) in [("eta2_endpoint_a", c.slope_a, c.d1, c.d2), ("eta3_endpoint_b", c.slope_b, c.d3, c.d4)] {
        let ok = slope.is_finite() && (slope - p).abs() <= SLOPE_TOL && lo > 0.0 && hi / lo <= SPREAD_TOL;
        rep.push(
            name,
            ok,
            Some(slope),
            format!(
                "log-log slope vs expected {p}; bounds [{lo:.4e}, {hi:.4e}] on t* = {:.4e} (nominal (n-1)/n = {nominal:.4})",
                c.t_star
            ),
        );
    }

    // (eta4): logarithmic derivative bound and kink orientation.
    rep.push(
        "eta4_derivative_bound",
        c.d5.is_finite(),
        Some(c.d5),
        "max |η'| min(B-t, t-A) / η",
    );
    rep.push(
        "eta4_kink",
        w.deta_minus >= w.deta_plus - 1e-12,
        Some(w.deta_minus - w.deta_plus),
        "η'_-(t0) - η'_+(t0) >= 0",
    );

    // (eta5): masses.
    match (w.quad_mass(w.a, w.t0), w.quad_mass(w.a, w.b)) {
        (Ok(lower), Ok(total)) => {
            rep.push("eta5_lower_mass", (lower - w.vm).abs() <= 1e-10, Some(lower - w.vm), "∫_A^t0 η - v_m");
            rep.push("eta5_total_mass", (total - 1.0).abs() <= 1e-10, Some(total - 1.0), "∫_A^B η - 1");
        }
        (l, t) => {
            let msg = l.err().or(t.err()).map(|e| e.to_string()).unwrap_or_default();
            rep.push("eta5_lower_mass", false, None, msg.clone());
            rep.push("eta5_total_mass", false, None, msg);
        }
    }
    rep
}
