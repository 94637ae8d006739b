//! Well-prepared data: the optimal one-dimensional layer placed along the
//! signed distance to `∂E₀`, shifted to carry the prescribed mass.

use crate::error::{Error, Result};
use crate::field::Field2D;
use crate::geometry::Geometry;
use crate::potential_ext::BoxedPotential;
use crate::scheme::f_eps;
use gammalab_core::numerics::bisect;
use gammalab_core::LayerModel;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct InitReport {
    pub tau_shift: f64,
    /// `(mass before shifting − m)/|Ω|`.
    pub mass_correction: f64,
    pub mass_residual: f64,
    /// `F_ε(u₀)/ε`.
    pub energy_over_eps: f64,
    /// `2 c_W P(E₀)`.
    pub first_order: f64,
    /// Implied well-preparedness constant `(F_ε(u₀) − ε F⁽¹⁾)/ε²`.
    pub c_measured: f64,
}

/// Mass of `u_{E₀} = a χ_{E₀} + b χ_{Ω∖E₀}` in the unit square.
pub fn limit_mass(geometry: &Geometry, a: f64, b: f64) -> f64 {
    let v = geometry.area();
    a * v + b * (1.0 - v)
}

/// `u₀ = z(d(x)/ε − τ)` on an `n × n` grid of the unit square, with `τ`
/// chosen so `∫u₀ = m` (default: the mass of `u_{E₀}`).
pub fn well_prepared_init(
    geometry: &Geometry,
    n: usize,
    eps: f64,
    layer: &LayerModel,
    pot: &BoxedPotential,
    m: Option<f64>,
) -> Result<(Field2D, InitReport)> {
    let (a, b) = (pot.a(), pot.b());
    let m = m.unwrap_or_else(|| limit_mass(geometry, a, b));
    if !(m > a && m < b) {
        return Err(Error::InvalidParameter(format!("mass {m} outside ({a}, {b})")));
    }
    let h = 1.0 / n as f64;
    let dist = Field2D::from_fn(n, n, h, |x, y| geometry.signed_distance(x, y) / eps);
    let prof = &layer.profile;
    let build = |tau: f64| dist.same_grid(dist.u.iter().map(|&s| prof.z(s - tau)).collect());
    let mass_of = |tau: f64| build(tau).mass();
    let correction = (mass_of(0.0) - m) / dist.area();
    let limit = 0.1 * (b - a);
    if correction.abs() > limit {
        return Err(Error::MassMismatch { correction, limit });
    }
    // Mass decreases in τ; bracket generously in layer units.
    let span = 4.0 * (correction.abs() / (b - a) / eps).max(1.0) + 4.0;
    let tau = bisect(|t| mass_of(t) - m, -span, span, 1e-15)?;
    let field = build(tau);
    let mass_residual = (field.mass() - m).abs();
    let fe = f_eps(&field, pot, eps);
    let first_order = 2.0 * layer.constants.c_w * geometry.perimeter();
    Ok((
        field,
        InitReport {
            tau_shift: tau,
            mass_correction: correction,
            mass_residual,
            energy_over_eps: fe / eps,
            first_order,
            c_measured: (fe - eps * first_order) / (eps * eps),
        },
    ))
}
