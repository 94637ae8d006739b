//! Sampled isoperimetric profiles and their one-sided derivatives.

use crate::error::{Error, Result};
use gammalab_core::numerics::extrapolate::polyfit_at_zero;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    Analytic,
    BruteForce,
    Heuristic,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OneSided {
    pub v: f64,
    pub d_minus: f64,
    pub d_plus: f64,
}

impl OneSided {
    /// Semi-concavity forces `D₋ ≥ D₊`; reported, never asserted.
    pub fn ordered(&self, tol: f64) -> bool {
        self.d_minus >= self.d_plus - tol
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IsoProfile {
    /// `(v_j, value_j)` sorted by `v`.
    pub samples: Vec<(f64, f64)>,
    pub provenance: Provenance,
    pub derivatives: Vec<OneSided>,
    pub semiconcavity: Option<f64>,
}

impl IsoProfile {
    pub fn new(mut samples: Vec<(f64, f64)>, provenance: Provenance) -> Self {
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        samples.dedup_by(|a, b| a.0 == b.0);
        Self {
            samples,
            provenance,
            derivatives: Vec::new(),
            semiconcavity: None,
        }
    }

    /// Samples `f` on the given points, skipping points where it is undefined.
    pub fn from_fn<F: FnMut(f64) -> Option<f64>>(points: &[f64], provenance: Provenance, mut f: F) -> Self {
        let samples = points.iter().filter_map(|&v| f(v).map(|y| (v, y))).collect();
        Self::new(samples, provenance)
    }

    /// Points `v₀` and `v₀ ± h₀ 2^{-k}` for `k = 0..levels`.
    pub fn stencil(v0: f64, h0: f64, levels: usize) -> Vec<f64> {
        let mut pts = vec![v0];
        for k in 0..levels {
            let h = h0 * 0.5f64.powi(k as i32);
            pts.push(v0 - h);
            pts.push(v0 + h);
        }
        pts
    }

    pub fn value_at(&self, v: f64) -> Option<f64> {
        let tol = 1e-14 * v.abs().max(1.0);
        self.samples.iter().find(|s| (s.0 - v).abs() <= tol).map(|s| s.1)
    }

    /// Computes and records one-sided derivatives at `v0`.
    pub fn mark(&mut self, v0: f64) -> Result<OneSided> {
        let d = one_sided_derivatives(self, v0)?;
        self.derivatives.push(d);
        Ok(d)
    }
}

/// Extrapolated one-sided difference quotients `D₋`, `D₊` at `v0`. The
/// profile must contain `v0` and at least two samples on each side; the
/// closest (up to four) samples per side enter a polynomial fit in the
/// offset, evaluated at zero offset.
pub fn one_sided_derivatives(profile: &IsoProfile, v0: f64) -> Result<OneSided> {
    let f0 = profile
        .value_at(v0)
        .ok_or_else(|| Error::InsufficientSamples(format!("no sample at v = {v0}")))?;
    let side = |sign: f64| -> Result<f64> {
        let mut pts: Vec<(f64, f64)> = profile
            .samples
            .iter()
            .filter(|s| sign * (s.0 - v0) > 1e-14 * v0.abs().max(1.0))
            .map(|&(v, y)| {
                let h = (v - v0).abs();
                (h, sign * (y - f0) / h)
            })
            .collect();
        if pts.len() < 2 {
            return Err(Error::InsufficientSamples(format!(
                "{} sample(s) {} v = {v0}",
                pts.len(),
                if sign < 0.0 { "left of" } else { "right of" }
            )));
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.truncate(4);
        let (hs, qs): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        let degree = (hs.len() - 1).min(2);
        Ok(polyfit_at_zero(&hs, &qs, degree))
    };
    Ok(OneSided {
        v: v0,
        d_minus: side(-1.0)?,
        d_plus: side(1.0)?,
    })
}

/// Least `C ≥ 0` with `Δ²𝓘 ≤ C h²` for every centred (divided) second
/// difference of the samples lying in `[j.0, j.1]`.
pub fn semiconcavity_estimate(profile: &IsoProfile, j: (f64, f64)) -> Result<f64> {
    let pts: Vec<(f64, f64)> = profile
        .samples
        .iter()
        .copied()
        .filter(|s| s.0 >= j.0 && s.0 <= j.1)
        .collect();
    if pts.len() < 5 {
        return Err(Error::InsufficientSamples(format!(
            "{} samples in [{}, {}], need 5",
            pts.len(),
            j.0,
            j.1
        )));
    }
    let c = pts
        .windows(3)
        .map(|w| {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            let (x2, y2) = w[2];
            let d01 = (y1 - y0) / (x1 - x0);
            let d12 = (y2 - y1) / (x2 - x1);
            2.0 * (d12 - d01) / (x2 - x0)
        })
        .fold(0.0f64, f64::max);
    Ok(c)
}
