//! Limits read off the ε-ladder and the closed-form liminf value they are
//! compared with.

use crate::error::{Error, Result};
use crate::solver::{profile_distance_raw, MinimizerResult};
use crate::weight::WeightFunction;
use gammalab_core::numerics::extrapolate::{polyfit_at_zero, richardson};
use gammalab_core::profile::{tau_by_bisection, weighted_moment, HalfLine};
use gammalab_core::{Constants, LayerModel};
use serde::Serialize;

/// First-order limit `2 c_W η(t1)` of a sharp two-phase state whose only
/// jump sits at `jumps[0]`.
pub fn gamma_limit_value(w: &WeightFunction, c_w: f64, jumps: &[f64]) -> Result<f64> {
    match jumps {
        [t] if *t > w.a && *t < w.b => Ok(2.0 * c_w * w.eta(*t)),
        [t] => Err(Error::InvalidParameter(format!("jump {t} outside (A, B)"))),
        _ => Err(Error::InvalidParameter(format!(
            "expected a single jump, got {}",
            jumps.len()
        ))),
    }
}

/// The interval `[2c_W η'_+ / ((b-a) η0), 2c_W η'_- / ((b-a) η0)]`.
pub fn lambda_bracket(w: &WeightFunction, k: &Constants) -> (f64, f64) {
    let s = 2.0 * k.c_w / (k.gap() * w.eta0);
    (s * w.deta_plus, s * w.deta_minus)
}

/// Extrapolation of `y(ε)` to `ε = 0`. Halving ladders use a Richardson
/// table in powers of `ε`; other spacings a linear least-squares fit.
/// Returns `None` when the sequence is not monotone.
pub fn extrapolate_in_eps(eps: &[f64], ys: &[f64]) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = eps.iter().copied().zip(ys.iter().copied()).collect();
    pts.sort_by(|a, b| b.0.total_cmp(&a.0));
    if pts.len() < 2 {
        return None;
    }
    let scale = pts.iter().map(|p| p.1.abs()).fold(0.0, f64::max).max(1e-300);
    let diffs: Vec<f64> = pts.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let significant: Vec<f64> = diffs.iter().copied().filter(|d| d.abs() > 1e-9 * scale).collect();
    if significant.windows(2).any(|w| w[0].signum() != w[1].signum()) {
        return None;
    }
    let halving = pts.windows(2).all(|w| ((w[0].0 / w[1].0) - 2.0).abs() < 1e-9);
    let (xs, vs): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    Some(if halving {
        richardson(&vs, 2.0, 1)
    } else {
        polyfit_at_zero(&xs, &vs, 1)
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LambdaLimit {
    /// Extrapolated limit, or the value at the smallest `ε` when skipped.
    pub estimate: f64,
    pub extrapolated: bool,
    /// `(ε, λ_ε)` as used.
    pub raw: Vec<(f64, f64)>,
    pub bracket: (f64, f64),
    /// Signed distance to the nearer bracket end (negative outside).
    pub margin: f64,
}

impl LambdaLimit {
    pub fn inside(&self) -> bool {
        self.margin >= 0.0
    }
}

pub fn extract_lambda_limit(results: &[MinimizerResult], w: &WeightFunction, k: &Constants) -> Result<LambdaLimit> {
    if results.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "need at least 3 ladder points, got {}",
            results.len()
        )));
    }
    let raw: Vec<(f64, f64)> = results.iter().map(|r| (r.eps, r.best_lambda())).collect();
    let (es, ls): (Vec<f64>, Vec<f64>) = raw.iter().copied().unzip();
    let ex = extrapolate_in_eps(&es, &ls);
    let smallest = raw.iter().copied().min_by(|a, b| a.0.total_cmp(&b.0)).unwrap();
    let estimate = ex.unwrap_or(smallest.1);
    let bracket = lambda_bracket(w, k);
    let margin = (estimate - bracket.0).min(bracket.1 - estimate);
    Ok(LambdaLimit {
        estimate,
        extrapolated: ex.is_some(),
        raw,
        bracket,
        margin,
    })
}

/// Extrapolated second-order gap along a ladder.
pub fn extrapolate_gap(results: &[MinimizerResult]) -> Option<f64> {
    let (es, gs): (Vec<f64>, Vec<f64>) = results.iter().map(|r| (r.eps, second_order_gap(r))).unzip();
    extrapolate_in_eps(&es, &gs)
}

/// Sup distance between `w_ε(s) = v_ε(t0 + εs)` and `z(s - τ0)` on `[-l, l]`.
pub fn rescaled_profile_distance(r: &MinimizerResult, layer: &LayerModel, tau0: f64, l: f64) -> Result<f64> {
    profile_distance_raw(&r.field, r.t0, r.eps, layer, tau0, l)
}

/// Value the shift integral must take: `λ0 ∫η / (W''(a) η(t0))`.
fn tau0_target(w: &WeightFunction, k: &Constants, lambda0: f64) -> Result<f64> {
    if !(w.eta0 > 0.0) {
        return Err(Error::InvalidParameter("η(t0) must be positive".into()));
    }
    Ok(lambda0 * w.total_mass() / (k.w2a()? * w.eta0))
}

/// Layer shift `τ0 = (I0 - λ0 ∫η / (W''(a) η(t0))) / (b - a)`.
pub fn solve_tau0(w: &WeightFunction, k: &Constants, lambda0: f64) -> Result<f64> {
    Ok((k.i0 - tau0_target(w, k, lambda0)?) / k.gap())
}

/// The same shift from a bracketing root finder on the shift integral.
pub fn solve_tau0_bisection(w: &WeightFunction, layer: &LayerModel, lambda0: f64) -> Result<f64> {
    let target = tau0_target(w, &layer.constants, lambda0)?;
    Ok(tau_by_bisection(&layer.profile, target)?)
}

/// The liminf value from explicit slopes and weight mass:
/// `2η'_- M_-(τ0) + 2η'_+ M_+(τ0) + [q = 1] λ0² ∫η / (2 W''(a))`,
/// with `M_±` the half-line moments of `√W(z(s-τ0)) z'(s-τ0) s`.
pub fn rhs_from_parts(
    layer: &LayerModel,
    deta_minus: f64,
    deta_plus: f64,
    mass: f64,
    lambda0: f64,
    tau0: f64,
) -> Result<f64> {
    let mm = weighted_moment(&layer.profile, tau0, Some(HalfLine::Negative))?;
    let mp = weighted_moment(&layer.profile, tau0, Some(HalfLine::Positive))?;
    let k = &layer.constants;
    let multiplier = if k.q == 1.0 {
        lambda0 * lambda0 * mass / (2.0 * k.w2a()?)
    } else {
        0.0
    };
    Ok(2.0 * deta_minus * mm + 2.0 * deta_plus * mp + multiplier)
}

pub fn theorem31_rhs(w: &WeightFunction, layer: &LayerModel, lambda0: f64, tau0: f64) -> Result<f64> {
    rhs_from_parts(layer, w.deta_minus, w.deta_plus, w.total_mass(), lambda0, tau0)
}

/// `(G_ε/ε - 2c_W η(t0))/ε`, extrapolated to zero grid spacing when the
/// solve carried a refined grid.
pub fn second_order_gap(r: &MinimizerResult) -> f64 {
    r.best_gap()
}
