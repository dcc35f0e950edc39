use serde::Serialize;

use super::spec::SubordinatorSpec;
use crate::error::{Error, Result};

/// Where a moment value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Recursion,
    DensityIntegral,
    MonteCarlo,
    ClosedForm,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Provenance::Recursion => "recursion",
            Provenance::DensityIntegral => "density-integral",
            Provenance::MonteCarlo => "monte-carlo",
            Provenance::ClosedForm => "closed-form",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEntry {
    pub order: f64,
    pub value: f64,
    pub provenance: Provenance,
}

/// Moments `E[I^r]` of one exponential functional.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentSequence {
    pub kill: f64,
    entries: Vec<MomentEntry>,
}

impl MomentSequence {
    pub fn new(kill: f64) -> Self {
        Self {
            kill,
            entries: Vec::new(),
        }
    }

    /// Adds an entry; moments of a positive variable are positive.
    pub fn push(&mut self, entry: MomentEntry) -> Result<()> {
        if !(entry.value > 0.0) || !entry.value.is_finite() {
            return Err(Error::Degenerate(format!(
                "moment of order {} evaluates to {}",
                entry.order, entry.value
            )));
        }
        self.entries.push(entry);
        Ok(())
    }

    pub fn entries(&self) -> &[MomentEntry] {
        &self.entries
    }

    pub fn get(&self, order: f64) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.order == order)
            .map(|e| e.value)
    }

    /// Integer moments as a plain vector, `values()[n] = E[I^n]`.
    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }
}

/// A density able to report `∫ x^r k(x) dx`.
pub trait FractionalMoments {
    fn fractional_moment(&self, order: f64) -> Result<f64>;

    fn provenance(&self) -> Provenance {
        Provenance::DensityIntegral
    }
}

fn moments_with(
    spec: &SubordinatorSpec,
    n_max: usize,
    phi: impl Fn(f64) -> Result<f64>,
) -> Result<MomentSequence> {
    let q = spec.kill();
    let mut seq = MomentSequence::new(q);
    let mut value = 1.0;
    seq.push(MomentEntry {
        order: 0.0,
        value,
        provenance: Provenance::Recursion,
    })?;
    for n in 1..=n_max {
        let x = n as f64;
        value *= x / (q + phi(x)?);
        seq.push(MomentEntry {
            order: x,
            value,
            provenance: Provenance::Recursion,
        })?;
    }
    Ok(seq)
}

/// `E[I^n] = n! / ∏_{i ≤ n} (q + φ(i))` for `n = 0..=n_max`.
pub fn positive_moments(spec: &SubordinatorSpec, n_max: usize) -> Result<MomentSequence> {
    moments_with(spec, n_max, |x| spec.laplace_exponent(x))
}

/// As [`positive_moments`], with `φ` always taken from the tail integral.
pub fn positive_moments_by_quadrature(
    spec: &SubordinatorSpec,
    n_max: usize,
) -> Result<MomentSequence> {
    moments_with(spec, n_max, |x| spec.laplace_exponent_by_quadrature(x))
}

/// `E[I^{-order}]` for an unkilled model.
///
/// Integer steps use `E[I^{-β-1}] = E[I^{-β}] φ(-β)/(-β)`, with `φ'(0)` at
/// `β = 0`. A fractional part is seeded from `density`. Each step needs
/// `φ(-β)` finite, so `order - 1` must lie below the tail decay rate (and the
/// mean must be finite when the first step starts at 0).
pub fn negative_moment(
    spec: &SubordinatorSpec,
    order: f64,
    density: Option<&dyn FractionalMoments>,
) -> Result<MomentEntry> {
    if spec.kill() != 0.0 {
        return Err(Error::Domain(
            "negative moments need an unkilled process".into(),
        ));
    }
    if !(order >= 0.0 && order.is_finite()) {
        return Err(Error::Domain(format!(
            "negative moment order {order} must be >= 0"
        )));
    }
    let steps = order.floor();
    let frac = order - steps;
    let (mut value, provenance) = if frac > 0.0 {
        let density = density.ok_or(Error::MissingDensity(order))?;
        (density.fractional_moment(-frac)?, density.provenance())
    } else {
        (1.0, Provenance::Recursion)
    };
    let alpha = spec.decay_rate();
    for j in 0..steps as u64 {
        let beta = frac + j as f64;
        let slope = if beta == 0.0 {
            let m = spec.mean();
            if !m.is_finite() {
                return Err(Error::Domain(format!(
                    "E[I^-{order}] is infinite: the jumps have infinite mean"
                )));
            }
            m
        } else {
            if beta >= alpha {
                return Err(Error::Domain(format!(
                    "E[I^-{order}] needs the exponent at {} but the tail decay rate is {alpha}",
                    -beta
                )));
            }
            spec.exponent_slope(-beta)?
        };
        value *= slope;
    }
    if !(value > 0.0 && value.is_finite()) {
        return Err(Error::Degenerate(format!(
            "E[I^-{order}] evaluates to {value}"
        )));
    }
    Ok(MomentEntry {
        order: -order,
        value,
        provenance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_model::variants::{CompoundPoissonExp, GammaExp, LampertiKilled, Stable};
    use crate::numerics::special::{gamma, gamma_ratio};
    use crate::numerics::QuadratureRequest;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    struct Density<F: Fn(f64) -> f64>(F, Option<f64>);

    impl<F: Fn(f64) -> f64> FractionalMoments for Density<F> {
        fn fractional_moment(&self, order: f64) -> Result<f64> {
            QuadratureRequest::new(|x: f64| x.powf(order) * (self.0)(x), 0.0, f64::INFINITY)
                .singularity(self.1)
                .integrate()
                .map(|e| e.value)
        }
    }

    #[test]
    fn drift_with_kill_gives_uniform_moments() {
        let s = SubordinatorSpec::drift_only(1.0, 1.0).unwrap();
        let m = positive_moments(&s, 3).unwrap();
        assert_relative_eq!(m.get(3.0).unwrap(), 0.25, max_relative = 1e-15);
        assert_eq!(m.get(0.0), Some(1.0));
    }

    #[test]
    fn lamperti_moments() {
        let t = LampertiKilled::new(0.5, 1.0).unwrap();
        let s = SubordinatorSpec::with_tail(0.0, t.natural_kill(), t).unwrap();
        let m = positive_moments(&s, 6).unwrap();
        assert_relative_eq!(m.get(2.0).unwrap(), 2.0, max_relative = 1e-12);
        for n in 0..=6 {
            let exact = gamma(n as f64 + 1.0) / gamma(0.5 * n as f64 + 1.0);
            assert_relative_eq!(m.values()[n], exact, max_relative = 1e-11);
        }
    }

    #[test]
    fn gamma_exp_moments_match_gamma_power() {
        for (a, s, beta) in [(1.0, 1.5, 2.0), (0.5, 1.0, 1.0), (0.3, 0.9, 2.5)] {
            let spec =
                SubordinatorSpec::with_tail(0.0, 0.0, GammaExp::new(a, s, beta).unwrap()).unwrap();
            let m = positive_moments(&spec, 6).unwrap();
            for n in 0..=6 {
                let x = n as f64;
                let exact = gamma_ratio(a * x + s, s) / beta.powf(x);
                assert_relative_eq!(m.values()[n], exact, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn recursion_identity_with_recomputed_exponent() {
        let spec = SubordinatorSpec::with_tail(0.7, 0.3, Stable::new(0.4).unwrap()).unwrap();
        let m = positive_moments(&spec, 8).unwrap().values();
        for n in 1..=8 {
            let phi = spec.laplace_exponent_by_quadrature(n as f64).unwrap();
            assert_relative_eq!(m[n] * (0.3 + phi), n as f64 * m[n - 1], max_relative = 1e-8);
        }
    }

    #[test]
    fn negative_moment_examples() {
        let g =
            SubordinatorSpec::with_tail(0.0, 0.0, GammaExp::new(0.5, 1.0, 1.0).unwrap()).unwrap();
        assert_eq!(negative_moment(&g, 0.0, None).unwrap().value, 1.0);
        let m1 = negative_moment(&g, 1.0, None).unwrap();
        assert_relative_eq!(m1.value, std::f64::consts::PI.sqrt(), max_relative = 1e-12);
        assert_eq!(m1.provenance, Provenance::Recursion);
        assert_eq!(m1.order, -1.0);

        let cp = SubordinatorSpec::with_tail(0.0, 0.0, CompoundPoissonExp::new(2.0, 0.5).unwrap())
            .unwrap();
        // Gamma(3/2, rate 2) density; ∫ x^{-1} k = 2 Γ(1/2)/Γ(3/2) = 4
        let k = |x: f64| 2f64.powf(1.5) / gamma(1.5) * x.sqrt() * (-2.0 * x).exp();
        let oracle = Density(k, Some(-0.5)).fractional_moment(-1.0).unwrap();
        assert_relative_eq!(oracle, 4.0, max_relative = 1e-9);
        assert_relative_eq!(
            negative_moment(&cp, 1.0, None).unwrap().value,
            oracle,
            max_relative = 1e-9
        );
    }

    #[test]
    fn fractional_order_uses_density_seed() {
        let g =
            SubordinatorSpec::with_tail(0.0, 0.0, GammaExp::new(0.5, 1.0, 1.0).unwrap()).unwrap();
        // k(x) = 2x e^{-x^2}: E[I^{-r}] = Γ(1 - r/2)
        let k = Density(|x: f64| 2.0 * x * (-x * x).exp(), None);
        let entry = negative_moment(&g, 1.5, Some(&k)).unwrap();
        assert_eq!(entry.provenance, Provenance::DensityIntegral);
        assert_relative_eq!(entry.value, gamma(0.25), max_relative = 1e-8);
        assert!(matches!(
            negative_moment(&g, 0.5, None),
            Err(Error::MissingDensity(_))
        ));
    }

    #[test]
    fn negative_moment_domain() {
        let g =
            SubordinatorSpec::with_tail(0.0, 0.0, GammaExp::new(0.5, 1.0, 1.0).unwrap()).unwrap();
        assert!(matches!(
            negative_moment(&g, 2.0, None),
            Err(Error::Domain(_))
        ));
        let st = SubordinatorSpec::with_tail(1.0, 0.0, Stable::new(0.5).unwrap()).unwrap();
        assert!(matches!(
            negative_moment(&st, 1.0, None),
            Err(Error::Domain(_))
        ));
        let killed = SubordinatorSpec::drift_only(1.0, 1.0).unwrap();
        assert!(matches!(
            negative_moment(&killed, 1.0, None),
            Err(Error::Domain(_))
        ));
    }

    proptest! {
        #[test]
        fn moments_positive_and_recursive(c in 0.0f64..3.0, q in 0.0f64..3.0, rate in 0.1f64..5.0, decay in 0.1f64..5.0) {
            let spec = SubordinatorSpec::with_tail(c, q, CompoundPoissonExp::new(rate, decay).unwrap()).unwrap();
            let m = positive_moments(&spec, 10).unwrap().values();
            for n in 1..=10 {
                prop_assert!(m[n] > 0.0);
                let lhs = m[n] * (q + spec.laplace_exponent(n as f64).unwrap());
                prop_assert!((lhs - n as f64 * m[n - 1]).abs() <= 1e-10 * lhs);
            }
        }
    }
}
