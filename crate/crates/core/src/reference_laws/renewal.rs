use super::laws::ReferenceLaw;
use crate::error::{Error, Result};
use crate::levy_model::SubordinatorSpec;
use crate::numerics::special::gamma;

/// Density `u_q` of the `q`-potential (renewal) measure of a killed
/// subordinator, for the models where it is explicit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RenewalDensity {
    /// Pure drift `c` killed at rate `q`: `c⁻¹ e^{-qx/c}`.
    Drift { c: f64, q: f64 },
    /// Killed Lamperti-type subordinator:
    /// `e^{-(β-1)x/a} (e^{x/a} - 1)^{a-1} / Γ(a+1)`.
    Lamperti { a: f64, beta: f64 },
}

impl RenewalDensity {
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("renewal density at {x}; need x > 0")));
        }
        Ok(match *self {
            Self::Drift { c, q } => (-q * x / c).exp() / c,
            Self::Lamperti { a, beta } => {
                // e^{x/a} - 1 = e^{x/a}(1 - e^{-x/a})
                let ln = -(beta - 1.0) * x / a + (a - 1.0) * (x / a + (-(-x / a).exp_m1()).ln());
                ln.exp() / gamma(a + 1.0)
            }
        })
    }

    /// `u_q` for the models where it is explicit: killed pure drift, and the
    /// Lamperti-type tail killed at its natural rate.
    pub fn matching(spec: &SubordinatorSpec) -> Option<Self> {
        match ReferenceLaw::matching(spec)? {
            ReferenceLaw::Example1 { c, q } => Some(Self::Drift { c, q }),
            ReferenceLaw::Example3Moments { a, beta } => Some(Self::Lamperti { a, beta }),
            ReferenceLaw::Example3Beta1 { a } => Some(Self::Lamperti { a, beta: 1.0 }),
            _ => None,
        }
    }

    /// Exponent `p` with `u_q(x) ≍ x^p` at 0, when `u_q` is unbounded there.
    pub fn singularity(&self) -> Option<f64> {
        match *self {
            Self::Drift { .. } => None,
            Self::Lamperti { a, .. } => Some(a - 1.0),
        }
    }
}
