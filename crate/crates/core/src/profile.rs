//! The heteroclinic layer `z' = √W(z)`, `z(0) = c`, and the constants built
//! from it.

use serde::Serialize;

use crate::numerics::gauss::GaussRule;
use crate::numerics::quad::{integrate, integrate_algebraic, integrate_with_breaks, QuadOptions};
use crate::numerics::{bisect, Dopri5};
use crate::potential::Potential;
use crate::{Error, Result};

/// Behaviour of the layer outside the sampled window.
#[derive(Debug, Clone, Copy, Serialize)]
pub enum TailModel {
    /// `z(t) ≈ a + amp_a e^{rate_a t}` for `t → −∞` and
    /// `z(t) ≈ b − amp_b e^{−rate_b t}` for `t → +∞`.
    Exponential {
        rate_a: f64,
        amp_a: f64,
        rate_b: f64,
        amp_b: f64,
    },
    /// `z ≡ a` for `t ≤ t_minus` and `z ≡ b` for `t ≥ t_plus`.
    Compact { t_minus: f64, t_plus: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct ProfileOptions {
    /// Half-width of the sampled window (used for `q = 1`).
    pub t_max: f64,
    /// Node spacing.
    pub spacing: f64,
    /// For `q = 1`, sampling stops once the distance to a well falls below
    /// this fraction of `b − a`; the exponential tail takes over beyond.
    pub tail_level: f64,
    pub rtol: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self {
            t_max: 20.0,
            spacing: 1.0 / 64.0,
            tail_level: 1e-8,
            rtol: 1e-13,
        }
    }
}

/// Sampled layer with quintic Hermite interpolation between nodes and a
/// parametric tail model outside them.
#[derive(Debug, Clone)]
pub struct Profile {
    potential: Potential,
    /// The represented function is `t ↦ z(t − shift)`.
    shift: f64,
    nodes: Vec<f64>,
    z: Vec<f64>,
    dz: Vec<f64>,
    d2z: Vec<f64>,
    pub tails: TailModel,
}

pub fn solve_profile(p: &Potential, opts: ProfileOptions) -> Result<Profile> {
    if !(opts.t_max > 0.0 && opts.spacing > 0.0) {
        return Err(Error::InvalidParameter("profile window and spacing must be positive".into()));
    }
    let (a, b, c) = (p.a, p.b, p.c);
    let rhs = |_: f64, y: f64| if y <= a || y >= b { 0.0 } else { p.sqrt_w(y) };
    let ode = Dopri5 {
        rtol: opts.rtol,
        atol: 1e-15 * (b - a),
        h_max: opts.spacing,
        h_min: 1e-13,
        max_steps: 5_000_000,
    };
    let name_well = |e: Error, well: &str| match e {
        Error::IntegrationStall { t, reason } => Error::IntegrationStall {
            t,
            reason: format!("toward well {well}: sqrt(W) too flat for the tolerance ({reason})"),
        },
        other => other,
    };

    if p.q < 1.0 {
        let t_plus = saturation_time(p, c, b)?;
        let t_minus = -saturation_time(p, a, c)?;
        let right = grid_to(t_plus, opts.spacing);
        let left = grid_to(t_minus, opts.spacing);
        let mut zr = ode.solve_at(rhs, 0.0, c, &right).map_err(|e| name_well(e, "b"))?;
        let mut zl = ode.solve_at(rhs, 0.0, c, &left).map_err(|e| name_well(e, "a"))?;
        *zr.last_mut().unwrap() = b;
        *zl.last_mut().unwrap() = a;
        let prof = assemble(p, left, zl, right, zr, TailModel::Compact { t_minus, t_plus });
        return Ok(prof);
    }

    let w2a = p.d2w(a);
    let w2b = p.d2w(b);
    if !(w2a > 0.0 && w2b > 0.0) {
        return Err(Error::InvalidParameter("q = 1 profile needs W'' > 0 at both wells".into()));
    }
    let rate_a = (0.5 * w2a).sqrt();
    let rate_b = (0.5 * w2b).sqrt();
    let level = opts.tail_level * (b - a);

    let right = grid_to(opts.t_max, opts.spacing);
    let left = grid_to(-opts.t_max, opts.spacing);
    let mut zr = ode.solve_at(rhs, 0.0, c, &right).map_err(|e| name_well(e, "b"))?;
    let mut zl = ode.solve_at(rhs, 0.0, c, &left).map_err(|e| name_well(e, "a"))?;
    let cut_r = zr.iter().position(|&y| b - y <= level).map_or(zr.len(), |i| i + 1);
    let cut_l = zl.iter().position(|&y| y - a <= level).map_or(zl.len(), |i| i + 1);
    let mut right = right;
    let mut left = left;
    right.truncate(cut_r);
    zr.truncate(cut_r);
    left.truncate(cut_l);
    zl.truncate(cut_l);
    let (tr, yr) = (*right.last().unwrap(), *zr.last().unwrap());
    let (tl, yl) = (*left.last().unwrap(), *zl.last().unwrap());
    let amp_b = (b - yr) * (rate_b * tr).exp();
    let amp_a = (yl - a) * (-rate_a * tl).exp();
    let tails = TailModel::Exponential {
        rate_a,
        amp_a,
        rate_b,
        amp_b,
    };
    Ok(assemble(p, left, zl, right, zr, tails))
}

/// `∫ ds/√W` from `lo` to `hi` where exactly one endpoint is a well.
fn saturation_time(p: &Potential, lo: f64, hi: f64) -> Result<f64> {
    let g = 0.5 * (p.q + 1.0);
    let at_a = lo == p.a;
    let (gl, gr) = if at_a { (-g, 0.0) } else { (0.0, -g) };
    let f = |s: f64, dl: f64, dr: f64| {
        if at_a {
            1.0 / p.sqrt_w_near_a(dl).unwrap_or_else(|| p.sqrt_w(s))
        } else {
            1.0 / p.sqrt_w_near_b(dr).unwrap_or_else(|| p.sqrt_w(s))
        }
    };
    let r = integrate_algebraic(f, lo, hi, gl, gr, QuadOptions::default())?;
    Ok(r.value)
}

/// `0, ±h, ±2h, …` up to `end`, with `end` itself as the final node.
fn grid_to(end: f64, h: f64) -> Vec<f64> {
    let n = ((end.abs() / h) - 0.5).ceil().max(1.0) as usize;
    let mut v: Vec<f64> = (1..n).map(|i| i as f64 * h * end.signum()).collect();
    v.push(end);
    v
}

fn assemble(p: &Potential, left: Vec<f64>, zl: Vec<f64>, right: Vec<f64>, zr: Vec<f64>, tails: TailModel) -> Profile {
    let mut nodes: Vec<f64> = left.iter().rev().copied().collect();
    let mut z: Vec<f64> = zl.iter().rev().copied().collect();
    nodes.push(0.0);
    z.push(p.c);
    nodes.extend_from_slice(&right);
    z.extend_from_slice(&zr);
    for v in z.iter_mut() {
        *v = v.clamp(p.a, p.b);
    }
    // Monotone by construction; remove round-off inversions.
    for i in 1..z.len() {
        if z[i] < z[i - 1] {
            z[i] = z[i - 1];
        }
    }
    let dz: Vec<f64> = z.iter().map(|&y| p.sqrt_w(y)).collect();
    let d2z: Vec<f64> = z.iter().map(|&y| 0.5 * p.dw(y)).collect();
    Profile {
        potential: p.clone(),
        shift: 0.0,
        nodes,
        z,
        dz,
        d2z,
        tails,
    }
}

#[inline]
fn hermite5(x: f64, h: f64, y0: [f64; 3], y1: [f64; 3]) -> f64 {
    let x2 = x * x;
    let x3 = x2 * x;
    let x4 = x3 * x;
    let x5 = x4 * x;
    let h00 = 1.0 - 10.0 * x3 + 15.0 * x4 - 6.0 * x5;
    let h01 = x - 6.0 * x3 + 8.0 * x4 - 3.0 * x5;
    let h02 = 0.5 * (x2 - 3.0 * x3 + 3.0 * x4 - x5);
    let h10 = 10.0 * x3 - 15.0 * x4 + 6.0 * x5;
    let h11 = -4.0 * x3 + 7.0 * x4 - 3.0 * x5;
    let h12 = 0.5 * (x3 - 2.0 * x4 + x5);
    h00 * y0[0] + h * h01 * y0[1] + h * h * h02 * y0[2] + h10 * y1[0] + h * h11 * y1[1] + h * h * h12 * y1[2]
}

/// Which part of the real line an integral is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfLine {
    Negative,
    Positive,
}

impl Profile {
    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// The translate `t ↦ z(t − s)` of this profile.
    pub fn shifted(&self, s: f64) -> Profile {
        let mut p = self.clone();
        p.shift += s;
        p
    }

    /// Sample nodes (unshifted) and values.
    pub fn samples(&self) -> (&[f64], &[f64]) {
        (&self.nodes, &self.z)
    }

    /// First and last sampled abscissae, in shifted coordinates.
    pub fn window(&self) -> (f64, f64) {
        (self.nodes[0] + self.shift, self.nodes[self.nodes.len() - 1] + self.shift)
    }

    /// `z(t − shift)`.
    pub fn z(&self, t: f64) -> f64 {
        self.z_raw(t - self.shift)
    }

    /// Derivative of [`Profile::z`], from the ODE.
    pub fn dz(&self, t: f64) -> f64 {
        let y = self.z(t);
        if y <= self.potential.a || y >= self.potential.b {
            0.0
        } else {
            self.potential.sqrt_w(y)
        }
    }

    fn z_raw(&self, s: f64) -> f64 {
        let n = self.nodes.len();
        let (a, b) = (self.potential.a, self.potential.b);
        if s <= self.nodes[0] {
            return match self.tails {
                TailModel::Exponential { rate_a, amp_a, .. } => a + amp_a * (rate_a * s).exp(),
                TailModel::Compact { .. } => a,
            };
        }
        if s >= self.nodes[n - 1] {
            return match self.tails {
                TailModel::Exponential { rate_b, amp_b, .. } => b - amp_b * (-rate_b * s).exp(),
                TailModel::Compact { .. } => b,
            };
        }
        let i = self.nodes.partition_point(|&x| x <= s).clamp(1, n - 1) - 1;
        let h = self.nodes[i + 1] - self.nodes[i];
        let x = (s - self.nodes[i]) / h;
        let v = hermite5(
            x,
            h,
            [self.z[i], self.dz[i], self.d2z[i]],
            [self.z[i + 1], self.dz[i + 1], self.d2z[i + 1]],
        );
        v.clamp(a, b)
    }

    /// Integrates `f(t, z(t − τ), z'(t − τ))` over `t ≤ split` and `t ≥ split`
    /// separately. `breaks` lists points where `f` is non-smooth in `t`.
    /// The integrand must vanish (or decay) where the layer sits at a well
    /// beyond every break.
    pub fn integrate_split<F>(&self, f: F, tau: f64, split: f64, breaks: &[f64]) -> Result<(f64, f64)>
    where
        F: Fn(f64, f64, f64) -> f64,
    {
        let off = self.shift + tau;
        let n = self.nodes.len();
        let lo_core = self.nodes[0] + off;
        let hi_core = self.nodes[n - 1] + off;
        let g = |t: f64| {
            let y = self.z_raw(t - off);
            let dy = if y <= self.potential.a || y >= self.potential.b {
                0.0
            } else {
                self.potential.sqrt_w(y)
            };
            f(t, y, dy)
        };
        let mut cuts: Vec<f64> = breaks.to_vec();
        cuts.push(split);
        let min_cut = cuts.iter().copied().fold(f64::INFINITY, f64::min);
        let max_cut = cuts.iter().copied().fold(f64::NEG_INFINITY, f64::max);

        let mut below = 0.0;
        let mut above = 0.0;
        let add = |a: f64, b: f64, v: f64, below: &mut f64, above: &mut f64| {
            debug_assert!(a <= b);
            if b <= split {
                *below += v;
            } else if a >= split {
                *above += v;
            } else {
                unreachable!("segment [{a}, {b}] straddles split {split}");
            }
        };

        // Segments outside the sampled core use adaptive quadrature on the
        // tail model, with every cut as a breakpoint.
        let outer = |a: f64, b: f64| -> Result<Vec<(f64, f64, f64)>> {
            let mut pts: Vec<f64> = cuts.iter().copied().filter(|&x| x > a && x < b).collect();
            pts.push(a);
            pts.push(b);
            pts.sort_by(f64::total_cmp);
            let mut out = Vec::new();
            for w in pts.windows(2) {
                if w[1] > w[0] {
                    let r = integrate(&g, w[0], w[1], QuadOptions { abs_tol: 1e-15, rel_tol: 1e-13, max_segments: 4000 })?;
                    out.push((w[0], w[1], r.value));
                }
            }
            Ok(out)
        };
        let (left_end, right_end) = match self.tails {
            TailModel::Exponential { rate_a, rate_b, .. } => (
                lo_core.min(min_cut) - 40.0 / rate_a,
                hi_core.max(max_cut) + 40.0 / rate_b,
            ),
            TailModel::Compact { .. } => (lo_core.min(min_cut), hi_core.max(max_cut)),
        };
        for (a, b, v) in outer(left_end, lo_core)?.into_iter().chain(outer(hi_core, right_end)?) {
            add(a, b, v, &mut below, &mut above);
        }

        let rule = GaussRule::new(8);
        for i in 0..n - 1 {
            let a = self.nodes[i] + off;
            let b = self.nodes[i + 1] + off;
            let mut pts = vec![a];
            pts.extend(cuts.iter().copied().filter(|&x| x > a && x < b));
            pts.push(b);
            pts.sort_by(f64::total_cmp);
            for w in pts.windows(2) {
                let v = rule.integrate(&g, w[0], w[1]);
                add(w[0], w[1], v, &mut below, &mut above);
            }
        }
        if !(below.is_finite() && above.is_finite()) {
            return Err(Error::NonFinite("profile integrand".into()));
        }
        Ok((below, above))
    }

    fn integrate_all<F: Fn(f64, f64, f64) -> f64>(&self, f: F, tau: f64, breaks: &[f64]) -> Result<f64> {
        let (lo, hi) = self.integrate_split(f, tau, 0.0, breaks)?;
        Ok(lo + hi)
    }
}

/// Step function equal to `a` for `t ≤ 0` and `b` for `t > 0`.
pub fn sgn_ab(t: f64, a: f64, b: f64) -> f64 {
    if t <= 0.0 {
        a
    } else {
        b
    }
}

/// `c_W = ∫_a^b √W`.
pub fn compute_cw(p: &Potential) -> Result<f64> {
    let opts = QuadOptions::abs(1e-12);
    let r = if p.q < 1.0 {
        let g = 0.5 * (p.q + 1.0);
        integrate_algebraic(|s, _, _| p.sqrt_w(s), p.a, p.b, g, g, QuadOptions { rel_tol: 1e-14, ..opts })?
    } else {
        integrate_with_breaks(|s| p.sqrt_w(s), p.a, p.b, &[p.c], QuadOptions { rel_tol: 1e-14, ..opts })?
    };
    Ok(r.value)
}

/// `c_sym = ∫ W(z(t)) t dt` for the profile as given (including its shift).
pub fn compute_csym(prof: &Profile) -> Result<f64> {
    let p = prof.potential();
    prof.integrate_all(|t, z, _| p.w(z) * t, 0.0, &[])
}

/// `I₀ = ∫ (z(t) − sgn_{a,b}(t)) dt`.
pub fn compute_i0(prof: &Profile) -> Result<f64> {
    shift_integral(prof, 0.0)
}

/// `∫ (z(t − τ) − sgn_{a,b}(t)) dt`.
pub fn shift_integral(prof: &Profile, tau: f64) -> Result<f64> {
    let p = prof.potential();
    let (a, b) = (p.a, p.b);
    prof.integrate_all(|t, z, _| z - sgn_ab(t, a, b), tau, &[0.0])
}

/// `∫ √W(z(s − τ)) z'(s − τ) s ds` over the whole line or one half-line.
pub fn weighted_moment(prof: &Profile, tau: f64, half: Option<HalfLine>) -> Result<f64> {
    let p = prof.potential();
    let (lo, hi) = prof.integrate_split(|s, z, dz| p.sqrt_w(z) * dz * s, tau, 0.0, &[])?;
    Ok(match half {
        None => lo + hi,
        Some(HalfLine::Negative) => lo,
        Some(HalfLine::Positive) => hi,
    })
}

/// `∫ (W(z) + z'²) dt`, which equals `2 c_W` along an exact layer.
pub fn energy_integral(prof: &Profile) -> Result<f64> {
    let p = prof.potential();
    prof.integrate_all(|_, z, dz| p.w(z) + dz * dz, 0.0, &[])
}

/// The scalar constants of a layer.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Constants {
    pub c_w: f64,
    pub c_sym: f64,
    pub i0: f64,
    /// `W''(a)`; `None` when the wells are degenerate.
    pub w2_a: Option<f64>,
    pub w2_b: Option<f64>,
    pub q: f64,
    pub a: f64,
    pub b: f64,
}

impl Constants {
    pub fn compute(prof: &Profile) -> Result<Self> {
        let p = prof.potential();
        Ok(Self {
            c_w: compute_cw(p)?,
            c_sym: compute_csym(prof)?,
            i0: compute_i0(prof)?,
            w2_a: p.w2_a(),
            w2_b: p.w2_b(),
            q: p.q,
            a: p.a,
            b: p.b,
        })
    }

    pub fn gap(&self) -> f64 {
        self.b - self.a
    }

    pub fn w2a(&self) -> Result<f64> {
        self.w2_a
            .ok_or_else(|| Error::Unsupported("W''(a) is not finite for degenerate wells (q < 1)".into()))
    }
}

/// A potential, its layer and the layer constants, computed once.
#[derive(Debug, Clone)]
pub struct LayerModel {
    pub profile: Profile,
    pub constants: Constants,
}

impl LayerModel {
    pub fn new(p: &Potential) -> Result<Self> {
        let profile = solve_profile(p, ProfileOptions::default())?;
        let constants = Constants::compute(&profile)?;
        Ok(Self { profile, constants })
    }

    pub fn potential(&self) -> &Potential {
        self.profile.potential()
    }
}

/// The `q = 1` layer shift: the unique `τ` with
/// `P (I₀ − τ(b−a)) = 2 c_W (n−1) κ / (W''(a)(b−a))`.
pub fn solve_tau_q1(perimeter: f64, kappa: f64, n: u32, k: &Constants) -> Result<f64> {
    if k.q != 1.0 {
        return Err(Error::Unsupported(format!("q = 1 layer shift requested for q = {}", k.q)));
    }
    if !(perimeter > 0.0) {
        return Err(Error::InvalidParameter(format!("perimeter must be positive, got {perimeter}")));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(format!("dimension must be at least 2, got {n}")));
    }
    Ok((k.i0 - tau_q1_target(perimeter, kappa, n, k)?) / k.gap())
}

/// Value the shift integral must take in the `q = 1` shift equation.
pub fn tau_q1_target(perimeter: f64, kappa: f64, n: u32, k: &Constants) -> Result<f64> {
    let rhs = 2.0 * k.c_w * (n as f64 - 1.0) * kappa / (k.w2a()? * k.gap());
    Ok(rhs / perimeter)
}

/// The `q < 1` layer shift, solving `∫ (z(t − τ) − sgn_{a,b}) dt = 0`.
pub fn solve_tau_qlt1(k: &Constants) -> Result<f64> {
    if !(k.q < 1.0) {
        return Err(Error::Unsupported(format!("q < 1 layer shift requested for q = {}", k.q)));
    }
    Ok(k.i0 / k.gap())
}

/// Independent root-finder for `shift_integral(τ) = target`.
pub fn tau_by_bisection(prof: &Profile, target: f64) -> Result<f64> {
    let f = |t: f64| shift_integral(prof, t).map(|v| v - target).unwrap_or(f64::NAN);
    let mut lo = -1.0;
    let mut hi = 1.0;
    for _ in 0..60 {
        if f(lo) > 0.0 && f(hi) < 0.0 {
            return bisect(f, lo, hi, 1e-13);
        }
        lo *= 2.0;
        hi *= 2.0;
    }
    Err(Error::NoBracket {
        lo,
        hi,
        context: "shift equation".into(),
    })
}

/// The zero of `W' + μ` nearest the central critical point.
pub fn central_zero_shifted(p: &Potential, mu: f64) -> Result<f64> {
    let f = |s: f64| p.dw(s) + mu;
    let quarter = 0.25 * (p.b - p.a);
    let first = bisect(f, p.c - quarter, p.c + quarter, 1e-12);
    if let Ok(r) = first {
        return Ok(r);
    }
    let span = p.b - p.a;
    let lo = (p.c - 2.0 * quarter).max(p.a + 1e-9 * span);
    let hi = (p.c + 2.0 * quarter).min(p.b - 1e-9 * span);
    bisect(f, lo, hi, 1e-12).map_err(|_| Error::NoBracket {
        lo,
        hi,
        context: format!("multiplier too large: W' + {mu} has no zero near the central point"),
    })
}
