use std::sync::Arc;

use super::spec::SubordinatorSpec;
use super::variants::Tilted;
use crate::error::{Error, Result};

/// The exponentially tilted model behind `x^ρ k(x)`.
///
/// Same drift, no killing, tail `e^{-ρz}(Π̄(z) + q)`; its exponent is
/// `λ(φ(λ+ρ) + q)/(λ+ρ)`.
pub fn rho_tilt(spec: &SubordinatorSpec, rho: f64) -> Result<SubordinatorSpec> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Domain(format!(
            "tilt parameter rho = {rho} must be positive"
        )));
    }
    let tail = Tilted::new(spec.tail_model().clone(), rho, spec.kill())?;
    SubordinatorSpec::new(spec.drift(), 0.0, Arc::new(tail))
}

/// Spectrally negative process with exponent `ψ(λ) = λ²/φ(λ)` paired with an
/// unkilled subordinator of finite mean, and the rate `q* = 1/φ'(0)`.
#[derive(Debug, Clone)]
pub struct DualSn {
    spec: SubordinatorSpec,
    q_star: f64,
}

impl DualSn {
    pub fn q_star(&self) -> f64 {
        self.q_star
    }

    pub fn subordinator(&self) -> &SubordinatorSpec {
        &self.spec
    }

    pub fn psi(&self, lambda: f64) -> Result<f64> {
        if !(lambda >= 0.0) {
            return Err(Error::Domain(format!(
                "dual exponent at {lambda}; need >= 0"
            )));
        }
        if lambda == 0.0 {
            return Ok(0.0);
        }
        Ok(lambda * lambda / self.spec.laplace_exponent(lambda)?)
    }
}

pub fn dual_sn(spec: &SubordinatorSpec) -> Result<DualSn> {
    if spec.kill() != 0.0 {
        return Err(Error::Domain(
            "the dual exists only for unkilled processes".into(),
        ));
    }
    let mean = spec.mean();
    if !mean.is_finite() {
        return Err(Error::Domain(
            "the dual needs jumps with finite mean".into(),
        ));
    }
    Ok(DualSn {
        spec: spec.clone(),
        q_star: 1.0 / mean,
    })
}
