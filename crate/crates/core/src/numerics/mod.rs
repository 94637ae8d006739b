//! Shared numerical building blocks.

pub mod extrapolate;
pub mod gauss;
pub mod ode;
pub mod quad;
pub mod roots;

pub use gauss::GaussRule;
pub use ode::Dopri5;
pub use quad::{integrate, integrate_algebraic, QuadOptions, QuadResult};
pub use roots::bisect;
