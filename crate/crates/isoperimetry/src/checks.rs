//! Diagnostics tying level sets, erosions and local profiles together.

use crate::analytic::{local_profile, Rect, Shape};
use crate::error::{Error, Result};
use crate::pixel::{PixelDomain, Region};
use crate::profile::{one_sided_derivatives, IsoProfile, Provenance};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub enum LevelSetOutcome {
    /// Every sublevel set satisfies the α-bound.
    Holds { thresholds: usize, max_alpha: f64 },
    Violated { threshold: f64, alpha: f64 },
    /// `‖u − u_{E₀}‖₁ > (b − a)δ`; nothing is claimed.
    HypothesisNotMet { norm: f64, bound: f64 },
}

impl LevelSetOutcome {
    /// `Some(true/false)` when the hypothesis holds, `None` otherwise.
    pub fn verdict(&self) -> Option<bool> {
        match self {
            LevelSetOutcome::Holds { .. } => Some(true),
            LevelSetOutcome::Violated { .. } => Some(false),
            LevelSetOutcome::HypothesisNotMet { .. } => None,
        }
    }
}

/// `a χ_{E₀} + b χ_{Ω∖E₀}` on the cells.
pub fn indicator_field(e0: &Region, a: f64, b: f64) -> Vec<f64> {
    e0.mask.iter().map(|&x| if x { a } else { b }).collect()
}

pub fn l1_distance(omega: &PixelDomain, u: &[f64], w: &[f64]) -> f64 {
    omega.cell_area() * u.iter().zip(w).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Checks `α(E₀, {u ≤ s}) ≤ δ` for every threshold `s`. Sublevel sets only
/// change at values of `u`, so the sweep visits `min u − 1`, every distinct
/// value, the midpoints between consecutive values and `max u + 1`.
pub fn level_set_alpha_check(
    omega: &PixelDomain,
    u: &[f64],
    e0: &Region,
    delta: f64,
    a: f64,
    b: f64,
) -> Result<LevelSetOutcome> {
    let n = omega.n_cells();
    if u.len() != n || e0.mask.len() != n {
        return Err(Error::InvalidParameter("field or E₀ does not match the domain".into()));
    }
    if !(b > a) || !(delta >= 0.0) {
        return Err(Error::InvalidParameter(format!("need a < b and δ ≥ 0 (a={a}, b={b}, δ={delta})")));
    }
    let norm = l1_distance(omega, u, &indicator_field(e0, a, b));
    let bound = (b - a) * delta;
    if norm > bound * (1.0 + 1e-12) {
        return Ok(LevelSetOutcome::HypothesisNotMet { norm, bound });
    }
    let mut values: Vec<f64> = u.to_vec();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let mut thresholds = vec![values[0] - 1.0];
    for w in values.windows(2) {
        thresholds.push(w[0]);
        thresholds.push(0.5 * (w[0] + w[1]));
    }
    thresholds.push(*values.last().unwrap());
    thresholds.push(values.last().unwrap() + 1.0);

    // Sweep thresholds upward, adding cells as they enter {u ≤ s}.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| u[i].total_cmp(&u[j]));
    let in_e0 = e0.count();
    let (mut f_minus_e0, mut e0_in_f) = (0usize, 0usize);
    let mut next = 0;
    let area = omega.cell_area();
    let mut max_alpha = 0.0f64;
    for &s in &thresholds {
        while next < n && u[order[next]] <= s {
            if e0.contains(order[next]) {
                e0_in_f += 1;
            } else {
                f_minus_e0 += 1;
            }
            next += 1;
        }
        let alpha = f_minus_e0.min(in_e0 - e0_in_f) as f64 * area;
        max_alpha = max_alpha.max(alpha);
        if alpha > delta * (1.0 + 1e-12) + 1e-15 {
            return Ok(LevelSetOutcome::Violated { threshold: s, alpha });
        }
    }
    Ok(LevelSetOutcome::Holds {
        thresholds: thresholds.len(),
        max_alpha,
    })
}

/// Cells whose centres lie at distance `> τ` from `ℝ² ∖ Ω`.
pub fn erode_pixel(omega: &PixelDomain, tau: f64) -> Result<Region> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidParameter(format!("τ = {tau} must be ≥ 0")));
    }
    let h = omega.h;
    let (w, ht) = (omega.cols as f64 * h, omega.rows as f64 * h);
    let outside: Vec<(f64, f64)> = (0..omega.rows)
        .flat_map(|r| (0..omega.cols).map(move |c| (r, c)))
        .filter(|&(r, c)| omega.cell_index(r, c).is_none())
        .map(|(r, c)| (c as f64 * h, r as f64 * h))
        .collect();
    let mask: Vec<bool> = (0..omega.n_cells())
        .map(|i| {
            let (x, y) = omega.center(i);
            let mut d = x.min(y).min(w - x).min(ht - y);
            for &(x0, y0) in &outside {
                let dx = (x0 - x).max(0.0).max(x - x0 - h);
                let dy = (y0 - y).max(0.0).max(y - y0 - h);
                d = d.min(dx.hypot(dy));
            }
            d > tau
        })
        .collect();
    let region = Region::new(mask, omega.cell_area());
    if region.count() == 0 {
        return Err(Error::EmptyErosion { tau });
    }
    Ok(region)
}

#[derive(Debug, Clone, Serialize)]
pub struct ErodedBound {
    pub tau: f64,
    /// Largest `C₂` with `𝓘_{U_τ}(v) ≥ C₂ √v` on the fit window.
    pub c2: f64,
    pub window: (f64, f64),
    pub used: usize,
    pub excluded: usize,
}

/// Fits the lower isoperimetric constant of the eroded rectangle over the
/// samples with `C₁τ < v < |U_τ|`.
pub fn eroded_iso_bound_check(u: &Rect, tau: f64, samples: &[f64], c1: f64) -> Result<ErodedBound> {
    let eroded = u.erode(tau)?;
    let area = eroded.area();
    let mut c2 = f64::INFINITY;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut used = 0;
    for &v in samples {
        if !(v > c1 * tau && v < area) {
            continue;
        }
        let (p, _) = eroded.profile(v)?;
        c2 = c2.min(p / v.sqrt());
        lo = lo.min(v);
        hi = hi.max(v);
        used += 1;
    }
    if used == 0 {
        return Err(Error::InsufficientSamples(format!(
            "no sample in ({}, {area})",
            c1 * tau
        )));
    }
    Ok(ErodedBound {
        tau,
        c2,
        window: (lo, hi),
        used,
        excluded: samples.len() - used,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub delta: f64,
    pub d_minus: f64,
    pub d_plus: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureSweep {
    pub v_m: f64,
    /// `(n − 1)κ` with `n = 2`.
    pub target: f64,
    pub rows: Vec<SweepRow>,
}

impl CurvatureSweep {
    /// Largest `|D± − target|` at the smallest δ.
    pub fn final_error(&self) -> f64 {
        let last = self
            .rows
            .iter()
            .min_by(|a, b| a.delta.total_cmp(&b.delta))
            .expect("non-empty sweep");
        (last.d_minus - self.target).abs().max((last.d_plus - self.target).abs())
    }

    /// Whether `|D± − target|` is nonincreasing as δ decreases.
    pub fn monotone(&self, tol: f64) -> bool {
        let mut rows = self.rows.clone();
        rows.sort_by(|a, b| b.delta.total_cmp(&a.delta));
        let err = |r: &SweepRow| (r.d_minus - self.target).abs().max((r.d_plus - self.target).abs());
        rows.windows(2).all(|w| err(&w[1]) <= err(&w[0]) + tol)
    }
}

/// One-sided derivatives at `|E₀|` of the local profile about the analytic
/// competitor `e0`, for each δ, compared with `(n − 1)κ = κ_known`.
pub fn curvature_limit_sweep(
    e0: &Shape,
    kappa_known: f64,
    deltas: &[f64],
    h0: f64,
    levels: usize,
) -> Result<CurvatureSweep> {
    let v_m = e0.volume;
    let points = IsoProfile::stencil(v_m, h0, levels);
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let mut err = None;
        let profile = IsoProfile::from_fn(&points, Provenance::Analytic, |v| match local_profile(e0, delta, v) {
            Ok(r) => r.map(|(p, _)| p),
            Err(e) => {
                err.get_or_insert(e);
                None
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        let d = one_sided_derivatives(&profile, v_m)?;
        rows.push(SweepRow {
            delta,
            d_minus: d.d_minus,
            d_plus: d.d_plus,
        });
    }
    Ok(CurvatureSweep {
        v_m,
        target: kappa_known,
        rows,
    })
}
