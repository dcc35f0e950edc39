//! Quantitative checks of solver output against independent oracles:
//! small-x and large-x asymptotics, the killed limit, closed-form laws,
//! tilting, moments and the renewal identity.

mod asymptotics;
mod consistency;
mod report;

pub use asymptotics::{
    dual_large_x_check, q_positive_limit_check, small_x_ratio_check, DUAL_TOLERANCE,
    KILLED_LIMIT_TOLERANCE, MIN_PROBES, SMALL_X_TOLERANCE,
};
pub use consistency::{
    compare_density, compare_to_reference, moment_agreement, renewal_check, tilt_consistency,
    TiltOutcome, REFERENCE_TOLERANCE, RENEWAL_PROBES, RENEWAL_TOLERANCE, TILT_TOLERANCE,
};
pub use report::{summary_table, Norm, Probe, ValidationReport};
