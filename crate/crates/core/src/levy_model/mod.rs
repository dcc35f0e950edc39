//! Subordinator models and their analytic objects.
//!
//! A model is `ξ = -ζ` where `ζ` is a subordinator with drift `c`, killed at
//! rate `q`, whose jumps are described by the tail `Π̄(z) = Π(z, ∞)`. Tail
//! families implement [`TailModel`] and are looked up by name in a
//! [`TailRegistry`], so model files select them at runtime.

mod moments;
mod registry;
mod spec;
mod tail;
mod transforms;
pub mod variants;

pub use moments::{
    negative_moment, positive_moments, positive_moments_by_quadrature, FractionalMoments,
    MomentEntry, MomentSequence, Provenance,
};
pub use registry::{TailConfig, TailFactory, TailRegistry};
pub use spec::{ModelFile, SubordinatorSpec};
pub use tail::{class_index, ClassIndex, TailModel, TailRatio};
pub use transforms::{dual_sn, rho_tilt, DualSn};
