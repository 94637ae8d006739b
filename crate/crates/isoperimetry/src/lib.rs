//! Relative isoperimetry for the sharp-interface limit: the isoperimetric
//! function `𝓘_Ω(v) = min{P(E;Ω) : |E| = v}` and the local function
//! `𝓘^{E₀,δ}` that additionally requires `α(E₀,E) ≤ δ`.
//!
//! Two representations are supported. Pixel domains are unions of square
//! cells with 4-neighbour perimeter and admit exact enumeration up to 24
//! cells; rectangles use the classical competitor families (straight cuts,
//! corner quarter disks and their complements) in closed form.

pub mod analytic;
pub mod anneal;
pub mod brute;
pub mod checks;
pub mod error;
pub mod pixel;
pub mod profile;

pub use analytic::{iso_analytic_rectangle, local_profile, Branch, Family, Rect, Shape};
pub use brute::{iso_bruteforce, profile_exhaustive, BruteForceResult};
pub use checks::{
    curvature_limit_sweep, erode_pixel, eroded_iso_bound_check, level_set_alpha_check, CurvatureSweep,
    LevelSetOutcome,
};
pub use error::{Error, Result};
pub use pixel::{alpha, perimeter_rel, PixelDomain, Region};
pub use profile::{one_sided_derivatives, semiconcavity_estimate, IsoProfile, OneSided, Provenance};
