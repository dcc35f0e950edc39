use crate::density_solver::StepDensity;
use crate::error::{Error, Result};

use super::laws::ReferenceLaw;

/// Anything that evaluates a probability density.
pub trait Density {
    fn density(&self, x: f64) -> Result<f64>;
}

impl Density for StepDensity {
    fn density(&self, x: f64) -> Result<f64> {
        self.evaluate(x)
    }
}

impl Density for ReferenceLaw {
    fn density(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.support();
        if x > lo && x < hi || x <= 0.0 {
            ReferenceLaw::density(self, x)
        } else {
            Ok(0.0)
        }
    }
}

impl<F: Fn(f64) -> f64> Density for F {
    fn density(&self, x: f64) -> Result<f64> {
        Ok(self(x))
    }
}

/// `k_ψ(x) = q* x⁻¹ k(1/x)`: the exponential-functional density of the
/// spectrally negative dual, given the density `k` of the subordinator's.
#[derive(Debug, Clone)]
pub struct DualDensity<D> {
    base: D,
    q_star: f64,
}

impl<D: Density> DualDensity<D> {
    pub fn q_star(&self) -> f64 {
        self.q_star
    }

    pub fn base(&self) -> &D {
        &self.base
    }
}

impl<D: Density> Density for DualDensity<D> {
    fn density(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("dual density at {x}; need x > 0")));
        }
        Ok(self.q_star / x * self.base.density(1.0 / x)?)
    }
}

pub fn dual_transform<D: Density>(base: D, q_star: f64) -> Result<DualDensity<D>> {
    if !(q_star > 0.0 && q_star.is_finite()) {
        return Err(Error::Domain(format!(
            "q* = {q_star} must be positive and finite"
        )));
    }
    Ok(DualDensity { base, q_star })
}
