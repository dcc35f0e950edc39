//! Shared numerical kernels: adaptive quadrature, limit extrapolation,
//! monotone root bracketing and a few gamma-function helpers.

mod extrapolate;
mod quadrature;
mod roots;
pub mod special;

pub use extrapolate::{extrapolate_limit, Limit};
pub use quadrature::{integrate, Estimate, QuadratureRequest, DEFAULT_ABS_TOL, DEFAULT_REL_TOL};
pub use roots::{bisect_monotone, expand_upper};
