//! Desk-scale simulations of the mass-preserving Allen–Cahn equation
//! `∂_t u = ε²Δu − W'(u) + ελ` and the Cahn–Hilliard equation
//! `∂_t u = −Δ(ε²Δu − W'(u))` on the unit square with Neumann conditions,
//! started from well-prepared layered data and run to `t = M/ε`.

pub mod checkpoint;
pub mod error;
pub mod experiment;
pub mod field;
pub mod geometry;
pub mod init;
pub mod potential_ext;
pub mod scheme;
pub mod spectral;

pub use error::{Error, Result};
pub use experiment::{run, slow_motion_experiment, LadderReport, RunOptions, RunReport, Scenario};
pub use field::Field2D;
pub use geometry::Geometry;
pub use init::{well_prepared_init, InitReport};
pub use potential_ext::BoxedPotential;
pub use scheme::{h1_dual_norm, step_ac, step_ch, Flow, SimConfig, Simulator};
