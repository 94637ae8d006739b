//! Discretization and constrained Newton minimization of
//! `G_ε(v) = ∫ (W(v) + ε²|v'|²) η dt` subject to `∫ v η = m`.
//!
//! Nodes carry the exact `η`-mass of their dual cells, and edges carry the
//! exact `η`-mass of the cell, so the scheme is second order on the uniform
//! layer window. Each requested `ε` is solved on a grid and on its uniform
//! refinement, and the pair is Richardson-extrapolated in `h`.

use crate::bordered::Bordered;
use crate::error::{Error, Result};
use crate::grid::{build_grid, refine, GridOptions};
use crate::weight::WeightFunction;
use gammalab_core::profile::{central_zero_shifted, TailModel};
use gammalab_core::{LayerModel, Potential};
use serde::Serialize;

/// Values `v_i` on grid nodes `t_i`.
#[derive(Debug, Clone, Serialize)]
pub struct WeightedField {
    pub t: Vec<f64>,
    pub v: Vec<f64>,
}

impl WeightedField {
    /// Piecewise-linear interpolation, constant beyond the ends.
    pub fn interpolate(&self, t: f64) -> f64 {
        let n = self.t.len();
        if t <= self.t[0] {
            return self.v[0];
        }
        if t >= self.t[n - 1] {
            return self.v[n - 1];
        }
        let i = self.t.partition_point(|&x| x <= t) - 1;
        let s = (t - self.t[i]) / (self.t[i + 1] - self.t[i]);
        self.v[i] + s * (self.v[i + 1] - self.v[i])
    }
}

/// Grid masses: `omega[i]` for the dual cell of node `i`, `coef[e]` equal to
/// the cell mass of edge `e` divided by its squared length.
pub(crate) struct Discretization {
    pub t: Vec<f64>,
    pub omega: Vec<f64>,
    pub coef: Vec<f64>,
}

impl Discretization {
    pub fn new(w: &WeightFunction, t: Vec<f64>) -> Self {
        let n = t.len();
        let mids: Vec<f64> = t.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
        let mut cum = Vec::with_capacity(2 * n - 1);
        for i in 0..n {
            cum.push(w.mass_below(t[i]));
            if i + 1 < n {
                cum.push(w.mass_below(mids[i]));
            }
        }
        let mut omega = vec![0.0; n];
        let mut coef = vec![0.0; n - 1];
        for i in 0..n {
            let lo = if i == 0 { cum[0] } else { cum[2 * i - 1] };
            let hi = if i + 1 == n { cum[2 * i] } else { cum[2 * i + 1] };
            omega[i] = hi - lo;
        }
        for e in 0..n - 1 {
            let d = t[e + 1] - t[e];
            coef[e] = (cum[2 * e + 2] - cum[2 * e]) / (d * d);
        }
        Self { t, omega, coef }
    }

    pub fn mass(&self, v: &[f64]) -> f64 {
        v.iter().zip(&self.omega).map(|(a, b)| a * b).sum()
    }

    pub fn energy(&self, v: &[f64], eps: f64, p: &Potential) -> f64 {
        let bulk: f64 = v.iter().zip(&self.omega).map(|(&x, &o)| p.w(x) * o).sum();
        let grad: f64 = v.windows(2).zip(&self.coef).map(|(x, &c)| c * (x[1] - x[0]).powi(2)).sum();
        bulk + eps * eps * grad
    }

    /// Gradient and tridiagonal Hessian of the discrete energy.
    fn derivatives(&self, v: &[f64], eps: f64, p: &Potential) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = v.len();
        let e2 = 2.0 * eps * eps;
        let mut g: Vec<f64> = (0..n).map(|i| p.dw(v[i]) * self.omega[i]).collect();
        let mut diag: Vec<f64> = (0..n).map(|i| p.d2w(v[i]) * self.omega[i]).collect();
        let mut off = vec![0.0; n - 1];
        for e in 0..n - 1 {
            let c = e2 * self.coef[e];
            let flux = c * (v[e + 1] - v[e]);
            g[e] -= flux;
            g[e + 1] += flux;
            diag[e] += c;
            diag[e + 1] += c;
            off[e] = -c;
        }
        (g, diag, off)
    }

    /// Sup over nodes of `|g_i - μ ω_i| / ω_i`.
    fn scaled_residual(&self, g: &[f64], mu: f64) -> f64 {
        g.iter()
            .zip(&self.omega)
            .map(|(gi, &o)| ((gi - mu * o) / o).abs())
            .fold(0.0, f64::max)
    }
}

/// Discrete energy of a field (no mass constraint involved).
pub fn energy_g(field: &WeightedField, eps: f64, p: &Potential, w: &WeightFunction) -> f64 {
    Discretization::new(w, field.t.clone()).energy(&field.v, eps, p)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct NewtonStep {
    /// 0 for the base grid, 1 for its refinement.
    pub grid: u8,
    /// Residual before the step.
    pub residual: f64,
    /// Energy after the step.
    pub energy: f64,
    pub step: f64,
    pub damping: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MinimizeOptions {
    pub grid: GridOptions,
    /// Also solve on the refined grid and extrapolate in `h`.
    pub richardson: bool,
    /// Target for the scaled Euler–Lagrange residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Locality radius in `L¹_η`; `None` uses `0.1 (b - a)`.
    pub locality: Option<f64>,
    /// Largest `ε` of the continuation ladder.
    pub eps0: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            grid: GridOptions::default(),
            richardson: true,
            tol: 1e-10,
            max_iter: 100,
            locality: None,
            eps0: 0.25,
        }
    }
}

/// Starting guess for a solve.
#[derive(Debug, Clone)]
pub enum Init {
    /// `z((t - t0)/ε - τ)`.
    Profile { tau: f64 },
    /// A solution at another `ε`, rescaled about `t0`.
    Rescaled { field: WeightedField, eps: f64 },
}

/// Values extrapolated to zero grid spacing from two nested grids.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Extrapolated {
    pub lambda: f64,
    pub gap: f64,
    pub tau_eps: f64,
    pub lambda_coarse: f64,
    pub gap_coarse: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MinimizerResult {
    pub eps: f64,
    pub t0: f64,
    /// Solution on the finest grid used.
    pub field: WeightedField,
    pub lambda: f64,
    pub energy: f64,
    /// `G_ε / ε`.
    pub first_order: f64,
    /// `(G_ε/ε - 2 c_W η(t0)) / ε` on the finest grid.
    pub gap: f64,
    pub el_residual: f64,
    pub mass_residual: f64,
    /// `(t - t0)/ε` where `v_ε` crosses `c_ε`.
    pub tau_eps: f64,
    pub c_eps: f64,
    /// Sup distance of the rescaled solution to `z(· - τ_ε)` on `[-l_ε, l_ε]`.
    pub profile_distance: f64,
    pub window: f64,
    pub locality_distance: f64,
    pub locality_radius: f64,
    pub locality_ok: bool,
    pub eta0: f64,
    pub history: Vec<NewtonStep>,
    pub extrapolated: Option<Extrapolated>,
}

impl MinimizerResult {
    /// The `h → 0` gap when available, else the fine-grid one.
    pub fn best_gap(&self) -> f64 {
        self.extrapolated.map_or(self.gap, |x| x.gap)
    }

    pub fn best_lambda(&self) -> f64 {
        self.extrapolated.map_or(self.lambda, |x| x.lambda)
    }
}

/// Mass of the sharp two-phase state `a` on `(A, t0)`, `b` on `(t0, B)`.
pub fn limit_mass(w: &WeightFunction, p: &Potential) -> f64 {
    p.a * w.vm + p.b * (w.total_mass() - w.vm)
}

/// Decay rate of the profile tails (slowest side); `None` for compact layers.
pub fn tail_rate(layer: &LayerModel) -> Option<f64> {
    match layer.profile.tails {
        TailModel::Exponential { rate_a, rate_b, .. } => Some(rate_a.min(rate_b)),
        TailModel::Compact { .. } => None,
    }
}

/// Diagnostic window `l_ε = C |log ε|`, `C = 3 / rate`.
pub fn diagnostic_window(layer: &LayerModel, eps: f64) -> f64 {
    let c = tail_rate(layer).map_or(1.5, |r| 3.0 / r);
    c * eps.ln().abs()
}

struct Solved {
    v: Vec<f64>,
    mu: f64,
    residual: f64,
    history: Vec<NewtonStep>,
}

fn newton(
    disc: &Discretization,
    p: &Potential,
    eps: f64,
    m: f64,
    mut v: Vec<f64>,
    mut mu: f64,
    opts: &MinimizeOptions,
) -> Result<Solved> {
    let total: f64 = disc.omega.iter().sum();
    let shift = (m - disc.mass(&v)) / total;
    v.iter_mut().for_each(|x| *x += shift);
    let mut energy = disc.energy(&v, eps, p);
    let mut history = Vec::new();
    let mut sigma = 0.0f64;
    let n = v.len();
    let col: Vec<f64> = disc.omega.iter().map(|o| -o).collect();
    for _ in 0..opts.max_iter {
        let (g, mut diag, off) = disc.derivatives(&v, eps, p);
        let residual = disc.scaled_residual(&g, mu);
        let mass_res = disc.mass(&v) - m;
        if residual <= opts.tol && mass_res.abs() <= 1e-12 {
            return Ok(Solved { v, mu, residual, history });
        }
        let mut rhs: Vec<f64> = g.iter().zip(&disc.omega).map(|(gi, o)| -(gi - mu * o)).collect();
        rhs.push(-mass_res);
        let slack = 1e-13 * energy.abs() + 1e-300;
        let mut accepted = false;
        for _attempt in 0..12 {
            if sigma > 0.0 {
                for i in 0..n {
                    diag[i] += sigma * disc.omega[i];
                }
            }
            let sol = Bordered {
                diag: &diag,
                off: &off,
                col: &col,
                row: &disc.omega,
                corner: 0.0,
            }
            .solve(&rhs);
            if sigma > 0.0 {
                for i in 0..n {
                    diag[i] -= sigma * disc.omega[i];
                }
            }
            if let Some(dx) = sol {
                let mut alpha = 1.0;
                while alpha >= 1.0 / 1024.0 {
                    let trial: Vec<f64> = v.iter().zip(&dx).map(|(a, d)| a + alpha * d).collect();
                    let e = disc.energy(&trial, eps, p);
                    if e.is_finite() && e <= energy + slack {
                        history.push(NewtonStep {
                            grid: 0,
                            residual,
                            energy: e,
                            step: alpha,
                            damping: sigma,
                        });
                        v = trial;
                        mu += alpha * dx[n];
                        energy = e;
                        accepted = true;
                        break;
                    }
                    alpha *= 0.5;
                }
            }
            if accepted {
                sigma = if sigma < 1e-8 { 0.0 } else { sigma * 0.1 };
                break;
            }
            sigma = if sigma == 0.0 { 1e-4 } else { sigma * 10.0 };
        }
        if !accepted {
            return Err(Error::Newton {
                eps,
                residual,
                reason: "no descent step found after backtracking and damping".into(),
            });
        }
    }
    let (g, _, _) = disc.derivatives(&v, eps, p);
    Err(Error::Newton {
        eps,
        residual: disc.scaled_residual(&g, mu),
        reason: format!("no convergence in {} iterations", opts.max_iter),
    })
}

fn initial_values(t: &[f64], w: &WeightFunction, layer: &LayerModel, eps: f64, init: &Init) -> Vec<f64> {
    match init {
        Init::Profile { tau } => t.iter().map(|&x| layer.profile.z((x - w.t0) / eps - tau)).collect(),
        Init::Rescaled { field, eps: from } => t
            .iter()
            .map(|&x| field.interpolate((w.t0 + (x - w.t0) * from / eps).clamp(w.a, w.b)))
            .collect(),
    }
}

/// Crossing of level `c` nearest to `t0`, by linear interpolation.
fn crossing(t: &[f64], v: &[f64], c: f64, t0: f64) -> Option<f64> {
    let mut best: Option<f64> = None;
    for i in 0..t.len() - 1 {
        let (a, b) = (v[i] - c, v[i + 1] - c);
        if a == 0.0 || a * b < 0.0 {
            let x = if a == 0.0 { t[i] } else { t[i] + (t[i + 1] - t[i]) * a / (a - b) };
            if best.map_or(true, |y| (x - t0).abs() < (y - t0).abs()) {
                best = Some(x);
            }
        }
    }
    best
}

fn locality_distance(disc: &Discretization, w: &WeightFunction, v: &[f64], p: &Potential) -> f64 {
    let mut d = 0.0;
    let n = v.len();
    for i in 0..n {
        let t = disc.t[i];
        if t < w.t0 {
            d += (v[i] - p.a).abs() * disc.omega[i];
        } else if t > w.t0 {
            d += (v[i] - p.b).abs() * disc.omega[i];
        } else {
            let lo = if i == 0 { t } else { 0.5 * (disc.t[i - 1] + t) };
            let hi = if i + 1 == n { t } else { 0.5 * (t + disc.t[i + 1]) };
            d += (v[i] - p.a).abs() * w.mass_between(lo, t) + (v[i] - p.b).abs() * w.mass_between(t, hi);
        }
    }
    d
}

/// Sup over `s ∈ [-l, l]` of `|v(t0 + ε s) - z(s - τ)|`, sampled at grid
/// nodes in the window and at its ends.
pub(crate) fn profile_distance_raw(
    field: &WeightedField,
    t0: f64,
    eps: f64,
    layer: &LayerModel,
    tau: f64,
    l: f64,
) -> Result<f64> {
    let (lo, hi) = (t0 - eps * l, t0 + eps * l);
    let (a, b) = (field.t[0], field.t[field.t.len() - 1]);
    if lo < a || hi > b {
        return Err(Error::Domain(format!(
            "window [{lo}, {hi}] exceeds grid coverage [{a}, {b}]"
        )));
    }
    let mut d: f64 = 0.0;
    let mut probe = |t: f64| {
        let s = (t - t0) / eps;
        d = d.max((field.interpolate(t) - layer.profile.z(s - tau)).abs());
    };
    probe(lo);
    probe(hi);
    for &t in field.t.iter().filter(|&&t| t > lo && t < hi) {
        probe(t);
    }
    Ok(d)
}

struct GridSolve {
    disc: Discretization,
    solved: Solved,
}

fn solve_on(
    t: Vec<f64>,
    w: &WeightFunction,
    layer: &LayerModel,
    eps: f64,
    m: f64,
    v0: Vec<f64>,
    mu0: f64,
    opts: &MinimizeOptions,
) -> Result<GridSolve> {
    let disc = Discretization::new(w, t);
    let solved = newton(&disc, layer.potential(), eps, m, v0, mu0, opts)?;
    Ok(GridSolve { disc, solved })
}

struct Diagnostics {
    lambda: f64,
    gap: f64,
    tau: f64,
}

fn diagnostics(gs: &GridSolve, w: &WeightFunction, layer: &LayerModel, eps: f64) -> Result<(Diagnostics, f64, f64)> {
    let p = layer.potential();
    let lambda = -gs.solved.mu / eps;
    let energy = gs.disc.energy(&gs.solved.v, eps, p);
    let gap = (energy / eps - 2.0 * layer.constants.c_w * w.eta0) / eps;
    let c_eps = central_zero_shifted(p, eps * lambda)?;
    let tc = crossing(&gs.disc.t, &gs.solved.v, c_eps, w.t0)
        .ok_or_else(|| Error::Domain(format!("solution does not cross c_eps = {c_eps}")))?;
    Ok((
        Diagnostics {
            lambda,
            gap,
            tau: (tc - w.t0) / eps,
        },
        energy,
        c_eps,
    ))
}

/// Minimizes `G_ε` at one `ε` from the given start.
pub fn minimize_geps(
    w: &WeightFunction,
    eps: f64,
    m: f64,
    layer: &LayerModel,
    init: &Init,
    opts: &MinimizeOptions,
) -> Result<MinimizerResult> {
    minimize_geps_with_mu(w, eps, m, layer, init, 0.0, opts)
}

fn minimize_geps_with_mu(
    w: &WeightFunction,
    eps: f64,
    m: f64,
    layer: &LayerModel,
    init: &Init,
    mu0: f64,
    opts: &MinimizeOptions,
) -> Result<MinimizerResult> {
    let p = layer.potential();
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps} outside (0, 1]")));
    }
    let coarse_t = build_grid(w.a, w.b, w.t0, eps, &opts.grid)?;
    let v0 = initial_values(&coarse_t, w, layer, eps, init);
    let coarse = solve_on(coarse_t, w, layer, eps, m, v0, mu0, opts)?;
    let (fine, extrap_from) = if opts.richardson {
        let ft = refine(&coarse.disc.t);
        let cf = WeightedField {
            t: coarse.disc.t.clone(),
            v: coarse.solved.v.clone(),
        };
        let v0: Vec<f64> = ft.iter().map(|&x| cf.interpolate(x)).collect();
        let fine = solve_on(ft, w, layer, eps, m, v0, coarse.solved.mu, opts)?;
        (fine, Some(coarse))
    } else {
        (coarse, None)
    };
    let (dfine, energy, c_eps) = diagnostics(&fine, w, layer, eps)?;
    let extrapolated = match &extrap_from {
        Some(c) => {
            let (dc, _, _) = diagnostics(c, w, layer, eps)?;
            let x = |f: f64, c: f64| (4.0 * f - c) / 3.0;
            Some(Extrapolated {
                lambda: x(dfine.lambda, dc.lambda),
                gap: x(dfine.gap, dc.gap),
                tau_eps: x(dfine.tau, dc.tau),
                lambda_coarse: dc.lambda,
                gap_coarse: dc.gap,
            })
        }
        None => None,
    };
    let field = WeightedField {
        t: fine.disc.t.clone(),
        v: fine.solved.v.clone(),
    };
    let window = diagnostic_window(layer, eps).min((w.t0 - w.a).min(w.b - w.t0) / eps);
    let profile_distance = profile_distance_raw(&field, w.t0, eps, layer, dfine.tau, window)?;
    let locality_distance = locality_distance(&fine.disc, w, &fine.solved.v, p);
    let locality_radius = opts.locality.unwrap_or(0.1 * (p.b - p.a));
    let mut history = extrap_from.map(|c| c.solved.history).unwrap_or_default();
    history.extend(fine.solved.history.iter().map(|s| NewtonStep { grid: 1, ..*s }));
    Ok(MinimizerResult {
        eps,
        t0: w.t0,
        lambda: dfine.lambda,
        energy,
        first_order: energy / eps,
        gap: dfine.gap,
        el_residual: fine.solved.residual,
        mass_residual: fine.disc.mass(&fine.solved.v) - m,
        tau_eps: dfine.tau,
        c_eps,
        profile_distance,
        window,
        locality_distance,
        locality_radius,
        locality_ok: locality_distance <= locality_radius,
        eta0: w.eta0,
        history,
        extrapolated,
        field,
    })
}

/// Continuation in `ε`: halves from `eps0` and visits every target
/// (largest first), warm-starting each solve from the previous one.
/// Returns the results at the targets, in descending `ε`.
pub fn minimize_ladder(
    w: &WeightFunction,
    layer: &LayerModel,
    m: f64,
    targets: &[f64],
    opts: &MinimizeOptions,
) -> Result<Vec<MinimizerResult>> {
    let mut t: Vec<f64> = targets.to_vec();
    t.sort_by(|a, b| b.total_cmp(a));
    t.dedup();
    let smallest = *t.last().ok_or_else(|| Error::InvalidParameter("empty eps ladder".into()))?;
    let mut seq: Vec<(f64, bool)> = t.iter().map(|&e| (e, true)).collect();
    let mut e = opts.eps0;
    while e > smallest * (1.0 + 1e-12) {
        if !t.iter().any(|&x| (x - e).abs() <= 1e-12 * e) {
            seq.push((e, false));
        }
        e *= 0.5;
    }
    seq.sort_by(|a, b| b.0.total_cmp(&a.0));
    // Intermediate steps only need the coarse grid.
    let stage_opts = MinimizeOptions {
        richardson: false,
        ..opts.clone()
    };
    let mut out = Vec::new();
    let mut init = Init::Profile { tau: 0.0 };
    let mut lambda = 0.0;
    for (eps, wanted) in seq {
        let mu = -lambda * eps;
        let r = minimize_geps_with_mu(w, eps, m, layer, &init, mu, if wanted { opts } else { &stage_opts })?;
        init = Init::Rescaled {
            field: r.field.clone(),
            eps,
        };
        lambda = r.lambda;
        if wanted {
            out.push(r);
        }
    }
    Ok(out)
}
