//! Gamma-function helpers on top of `statrs`.

use std::f64::consts::PI;

pub use statrs::function::gamma::{digamma, gamma, gamma_lr, gamma_ur, ln_gamma};

/// `Γ(x + a) / Γ(x)` for `x + a > 0`; `x` itself may be zero or negative,
/// where `1/Γ(x)` is evaluated by reflection.
pub fn gamma_shift_ratio(x: f64, a: f64) -> f64 {
    if x > 0.0 {
        (ln_gamma(x + a) - ln_gamma(x)).exp()
    } else {
        // 1/Γ(x) = sin(πx) Γ(1 - x) / π
        gamma(x + a) * (PI * x).sin() * gamma(1.0 - x) / PI
    }
}

/// `Γ(num) / Γ(den)` for positive arguments, stable for large values.
pub fn gamma_ratio(num: f64, den: f64) -> f64 {
    (ln_gamma(num) - ln_gamma(den)).exp()
}
