use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::registry::{TailConfig, TailRegistry};
use super::tail::TailModel;
use super::variants::Zero;
use crate::error::{Error, Result};
use crate::numerics::{Estimate, QuadratureRequest};

/// On-disk form of a model: `{"drift": c, "kill": q, "tail": {"variant": ..., ...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub drift: f64,
    #[serde(default)]
    pub kill: f64,
    pub tail: TailConfig,
}

/// A subordinator `ζ` with drift `c`, killing rate `q` and jump tail `Π̄`.
///
/// The exponential functional of `ξ = -ζ` is finite exactly when this
/// subordinator is nontrivial, which the constructor enforces.
#[derive(Debug, Clone)]
pub struct SubordinatorSpec {
    drift: f64,
    kill: f64,
    tail: Arc<dyn TailModel>,
}

impl SubordinatorSpec {
    pub fn new(drift: f64, kill: f64, tail: Arc<dyn TailModel>) -> Result<Self> {
        if !(drift >= 0.0 && drift.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "drift {drift} must be finite and nonnegative"
            )));
        }
        if !(kill >= 0.0 && kill.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "kill rate {kill} must be finite and nonnegative"
            )));
        }
        if drift == 0.0 && kill == 0.0 && tail.is_zero() {
            return Err(Error::InvalidSpec(
                "zero drift, zero kill and no jumps: the process does not drift to -infinity"
                    .into(),
            ));
        }
        Ok(Self { drift, kill, tail })
    }

    /// Pure drift `c` with killing rate `q`.
    pub fn drift_only(drift: f64, kill: f64) -> Result<Self> {
        Self::new(drift, kill, Arc::new(Zero {}))
    }

    pub fn with_tail<T: TailModel + 'static>(drift: f64, kill: f64, tail: T) -> Result<Self> {
        Self::new(drift, kill, Arc::new(tail))
    }

    pub fn from_file(file: &ModelFile, registry: &TailRegistry) -> Result<Self> {
        Self::new(file.drift, file.kill, registry.build(&file.tail)?)
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            drift: self.drift,
            kill: self.kill,
            tail: TailConfig::of(self.tail.as_ref()),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        Self::from_file(&file, TailRegistry::global())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("model files always serialize")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn kill(&self) -> f64 {
        self.kill
    }

    pub fn tail_model(&self) -> &Arc<dyn TailModel> {
        &self.tail
    }

    /// Same drift and tail, different killing rate.
    pub fn with_kill(&self, kill: f64) -> Result<Self> {
        Self::new(self.drift, kill, self.tail.clone())
    }

    /// `Π̄(z)`.
    pub fn tail(&self, z: f64) -> Result<f64> {
        if !(z > 0.0) {
            return Err(Error::Domain(format!(
                "tail evaluated at z = {z}; need z > 0"
            )));
        }
        if self.tail.is_zero() {
            return Ok(0.0);
        }
        Ok(self.tail.eval(z))
    }

    /// Class index `α` of the tail; the Laplace exponent is finite on `(-α, ∞)`.
    pub fn decay_rate(&self) -> f64 {
        if self.tail.is_zero() {
            f64::INFINITY
        } else {
            self.tail.decay_rate()
        }
    }

    fn check_argument(&self, lambda: f64) -> Result<()> {
        if lambda.is_nan() || lambda == f64::INFINITY {
            return Err(Error::Domain(format!("Laplace exponent at {lambda}")));
        }
        let alpha = self.decay_rate();
        if lambda < 0.0 && lambda <= -alpha {
            return Err(Error::Domain(format!(
                "Laplace exponent at {lambda}: tail decay rate is {alpha}, need argument > {}",
                -alpha
            )));
        }
        Ok(())
    }

    /// `∫₀^∞ e^{-λu} Π̄(u) du` by adaptive quadrature.
    pub fn tail_transform(&self, lambda: f64) -> Result<Estimate> {
        self.check_argument(lambda)?;
        if self.tail.is_zero() {
            return Ok(Estimate {
                value: 0.0,
                error: 0.0,
            });
        }
        let tail = self.tail.as_ref();
        let scale = match lambda + self.decay_rate() {
            r if r.is_finite() && r > 0.0 => (1.0 / r).clamp(0.25, 64.0),
            _ => 1.0,
        };
        QuadratureRequest::new(
            |u: f64| {
                let t = tail.eval(u);
                if t == 0.0 {
                    0.0
                } else {
                    (-lambda * u).exp() * t
                }
            },
            0.0,
            f64::INFINITY,
        )
        .singularity(tail.singularity())
        .tail_scale(scale)
        .integrate()
    }

    /// `φ(λ) = cλ + λ ∫₀^∞ e^{-λu} Π̄(u) du`, in closed form when the tail has one.
    pub fn laplace_exponent(&self, lambda: f64) -> Result<f64> {
        self.check_argument(lambda)?;
        if lambda == 0.0 {
            return Ok(0.0);
        }
        match self.tail.jump_exponent(lambda) {
            Some(j) => Ok(self.drift * lambda + j),
            None => self.laplace_exponent_by_quadrature(lambda),
        }
    }

    /// `φ(λ)` from the tail integral alone, ignoring any closed form.
    pub fn laplace_exponent_by_quadrature(&self, lambda: f64) -> Result<f64> {
        if lambda == 0.0 {
            self.check_argument(lambda)?;
            return Ok(0.0);
        }
        Ok(lambda * (self.drift + self.tail_transform(lambda)?.value))
    }

    /// `φ(λ)/λ = c + ∫ e^{-λu} Π̄(u) du`, equal to `φ'(0)` at `λ = 0`.
    pub fn exponent_slope(&self, lambda: f64) -> Result<f64> {
        if lambda == 0.0 {
            return Ok(self.mean());
        }
        Ok(self.laplace_exponent(lambda)? / lambda)
    }

    /// `φ'(0) = c + ∫ x Π(dx)`; infinite when jumps have infinite mean.
    pub fn mean(&self) -> f64 {
        if self.tail.is_zero() {
            return self.drift;
        }
        let jumps = match self.tail.mean_jump() {
            Some(m) => m,
            None => self
                .tail_transform(0.0)
                .map(|e| e.value)
                .unwrap_or(f64::INFINITY),
        };
        self.drift + jumps
    }
}
