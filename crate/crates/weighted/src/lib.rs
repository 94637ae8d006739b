//! Weighted one-dimensional reduction of the mass-constrained phase-field
//! problem: the touching isoperimetric surrogate `𝓘`, the weight
//! `η = 𝓘 ∘ V`, and minimization of
//! `G_ε(v) = ∫ (W(v) + ε²|v'|²) η dt` subject to `∫ v η = m`.

pub mod analysis;
mod bordered;
pub mod error;
pub mod grid;
pub mod iso;
pub mod solver;
pub mod weight;

pub use error::{Error, Result};
pub use iso::{build_touching_iso, build_with_drop, Side, TouchingIso, TouchingParams};
pub use solver::{energy_g, minimize_geps, minimize_ladder, Init, MinimizeOptions, MinimizerResult, WeightedField};
pub use weight::{build_eta, solve_v, validate_eta, WeightFunction};
