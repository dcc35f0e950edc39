//! Densities of exponential functionals `I = ∫₀^{e_q} e^{ξ_s} ds` of negated,
//! possibly killed subordinators `ξ = -ζ`.
//!
//! [`levy_model`] describes `ζ`; [`density_solver`] computes the density of
//! `I` on a geometric grid; [`reference_laws`], [`validation`] and
//! [`mc_oracle`] check the result.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod density_solver;
pub mod error;
pub mod levy_model;
pub mod mc_oracle;
pub mod numerics;
pub mod reference_laws;
pub mod validation;

pub use error::{Error, Result};
