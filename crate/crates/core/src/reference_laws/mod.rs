//! Closed-form laws of exponential functionals, used as oracles.

mod dual;
mod laws;
mod renewal;

pub use dual::{dual_transform, Density, DualDensity};
pub use laws::{example1_dual_density, ReferenceLaw};
pub use renewal::RenewalDensity;
