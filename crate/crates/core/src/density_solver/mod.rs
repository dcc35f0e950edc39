//! Step-function solution of
//! `(1 - cx) k(x) = ∫_x^∞ Π̄(log(y/x)) k(y) dy + q ∫_x^∞ k(y) dy`
//! on a geometric grid, by back-substitution from the right end.

mod grid;
mod residual;
mod scheme;
mod solve;
mod step;
mod weights;

pub use grid::{build_grid, GeometricGrid, DEFAULT_CELLS, DEFAULT_RATIO, TAIL_BOUND};
pub use residual::{residual, residual_with, ResidualReport, DEFAULT_PROBES};
pub use scheme::{CollocationScheme, LeftNode, Midpoint, SchemeRegistry};
pub use solve::{solve, solve_with, solve_with_weights, SolverOptions};
pub use step::StepDensity;
pub use weights::{kernel_weights, KernelWeights};
