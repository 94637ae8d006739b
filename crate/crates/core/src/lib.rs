//! Numerical core of the laboratory: double-well potentials, the heteroclinic
//! transition profile `z' = sqrt(W(z))`, the layer constants derived from it,
//! and the closed-form second-order energy of first-order minimizers.
//!
//! The [`numerics`] module holds the shared building blocks (adaptive
//! Gauss–Kronrod quadrature, Gauss–Legendre rules, a Dormand–Prince
//! integrator and bracketing root finders) used by every other crate in the
//! workspace.

pub mod error;
pub mod gamma2;
pub mod numerics;
pub mod potential;
pub mod profile;
pub mod report;

pub use error::{Error, Result};
pub use potential::Potential;
pub use profile::{Constants, LayerModel, Profile};
pub use report::{Check, ValidationReport};
