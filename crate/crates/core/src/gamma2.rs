//! Closed-form second-order limit and its use as a selection criterion.

use serde::{Deserialize, Serialize};

use crate::profile::{solve_tau_q1, solve_tau_qlt1, Constants};
use crate::{Error, Result};

/// First-order minimizer data: interface curvature and perimeter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizerGeometry {
    /// Mean curvature of `{u = a}` (average of principal curvatures, outward).
    pub kappa: f64,
    /// Relative perimeter of `{u = a}`.
    pub perimeter: f64,
    pub n: u32,
    /// Volume fraction of `{u = a}`.
    pub vm: f64,
}

impl MinimizerGeometry {
    pub fn new(kappa: f64, perimeter: f64, n: u32) -> Self {
        Self {
            kappa,
            perimeter,
            n,
            vm: f64::NAN,
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.perimeter > 0.0) {
            return Err(Error::InvalidParameter(format!("perimeter must be positive, got {}", self.perimeter)));
        }
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!("dimension must be at least 2, got {}", self.n)));
        }
        Ok(())
    }
}

/// Volume fraction `(b − m)/(b − a)` of the `a`-phase for total mass `m`.
pub fn volume_fraction(m: f64, a: f64, b: f64) -> Result<f64> {
    if !(a < m && m < b) {
        return Err(Error::InvalidParameter(format!("mass {m} must lie strictly between the wells {a} and {b}")));
    }
    Ok((b - m) / (b - a))
}

/// Second-order value for non-degenerate wells.
pub fn predict_f2_q1(g: &MinimizerGeometry, k: &Constants) -> Result<f64> {
    g.check()?;
    if k.q != 1.0 {
        return Err(Error::Unsupported(format!("q = 1 formula applied to q = {}", k.q)));
    }
    let tau = solve_tau_q1(g.perimeter, g.kappa, g.n, k)?;
    let nm1 = g.n as f64 - 1.0;
    let gap = k.gap();
    let first = 2.0 * k.c_w * k.c_w * nm1 * nm1 * g.kappa * g.kappa / (k.w2a()? * gap * gap);
    let second = 2.0 * (k.c_sym + k.c_w * tau) * nm1 * g.kappa * g.perimeter;
    Ok(first + second)
}

/// Second-order value for degenerate wells, `q ∈ (0, 1)`.
pub fn predict_f2_qlt1(g: &MinimizerGeometry, k: &Constants) -> Result<f64> {
    g.check()?;
    if !(k.q < 1.0) {
        return Err(Error::Unsupported(format!("q < 1 formula applied to q = {}", k.q)));
    }
    let tau = solve_tau_qlt1(k)?;
    Ok(2.0 * (k.c_sym + k.c_w * tau) * (g.n as f64 - 1.0) * g.kappa * g.perimeter)
}

pub fn predict_f2(g: &MinimizerGeometry, k: &Constants) -> Result<f64> {
    if k.q == 1.0 {
        predict_f2_q1(g, k)
    } else {
        predict_f2_qlt1(g, k)
    }
}

/// Slope of the isoperimetric function at a minimizer, `(n − 1) κ`.
pub fn iso_derivative_relation(kappa: f64, n: u32) -> f64 {
    (n as f64 - 1.0) * kappa
}

#[derive(Debug, Clone, Serialize)]
pub struct Selection {
    pub index: usize,
    pub values: Vec<f64>,
    /// Indices whose value ties the minimum within the tolerance.
    pub ties: Vec<usize>,
}

/// Ranks first-order minimizers by their second-order value; ties (within
/// `tie_tol`, relative) go to the lowest index.
pub fn select_minimizer(cands: &[MinimizerGeometry], k: &Constants, tie_tol: f64) -> Result<Selection> {
    if cands.is_empty() {
        return Err(Error::InvalidParameter("no candidate minimizers".into()));
    }
    let values = cands.iter().map(|g| predict_f2(g, k)).collect::<Result<Vec<_>>>()?;
    let best = values.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = best.abs().max(1.0);
    let ties: Vec<usize> = (0..values.len())
        .filter(|&i| values[i] - best <= tie_tol * scale)
        .collect();
    Ok(Selection {
        index: ties[0],
        values,
        ties,
    })
}
