//! Monte-Carlo ground truth for exponential functionals: path simulation
//! with small-jump compensation, KS comparison, a Lamperti-clock density
//! estimator, and a shape check for the increasing functional.

mod checks;
mod jumps;
mod lamperti;
mod simulate;

pub use checks::{
    cell_mass_bound, ks_against_density, ks_distance, monotone_histogram_check, MonotoneHistogram,
    KS_CRITICAL,
};
pub use jumps::{check_cutoff, default_cutoff, MAX_CUTOFF, TARGET_EVENTS};
pub use lamperti::{lamperti_density_estimate, DensityEstimate};
pub use simulate::{simulate, Direction, SampleSet, SimulationOptions, RELATIVE_TAIL};
