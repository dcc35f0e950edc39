use std::f64::consts::PI;

use serde::Serialize;
use statrs::function::beta::beta_reg;
use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::levy_model::variants::{GammaExp, LampertiKilled};
use crate::levy_model::{rho_tilt, FractionalMoments, Provenance, SubordinatorSpec};
use crate::numerics::special::{gamma, gamma_lr, gamma_ratio, gamma_ur, ln_gamma};

/// A law with known density and/or moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum ReferenceLaw {
    /// Pure drift `c` killed at rate `q`: `q (1 - cx)^{q/c - 1}` on `(0, 1/c)`, i.e. `c⁻¹ B(1, q/c)`.
    Example1 { c: f64, q: f64 },
    /// `x^ρ`-tilt of [`ReferenceLaw::Example1`]: `c⁻¹ B(ρ + 1, q/c)`.
    Example1Tilted { c: f64, q: f64, rho: f64 },
    /// `β⁻¹ γ_s^a`, with density `β^{s/a}/(aΓ(s)) x^{(s-a)/a} e^{-(βx)^{1/a}}`.
    Example2 { a: f64, s: f64, beta: f64 },
    /// Law of `1/Z` with `Z = β⁻¹ γ_{s-a}^a`.
    Example2Dual { a: f64, s: f64, beta: f64 },
    /// Moments `Γ(1 + r) Γ(β) / Γ(ar + β)`; no closed-form density.
    Example3Moments { a: f64, beta: f64 },
    /// `X_a^{-a}` for a positive `a`-stable `X_a`; density known for `a = 1/2`
    /// (half-normal `e^{-x²/4}/√π`).
    Example3Beta1 { a: f64 },
}

fn need(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidSpec(msg()))
    }
}

impl ReferenceLaw {
    pub fn example1(c: f64, q: f64) -> Result<Self> {
        need(c > 0.0 && q > 0.0, || {
            format!("example 1 needs c, q > 0 (got {c}, {q})")
        })?;
        Ok(Self::Example1 { c, q })
    }

    pub fn example1_tilted(c: f64, q: f64, rho: f64) -> Result<Self> {
        need(c > 0.0 && q > 0.0, || {
            format!("example 1 needs c, q > 0 (got {c}, {q})")
        })?;
        need(rho > 0.0, || format!("tilt rho = {rho} must be positive"))?;
        Ok(Self::Example1Tilted { c, q, rho })
    }

    pub fn example2(a: f64, s: f64, beta: f64) -> Result<Self> {
        GammaExp::new(a, s, beta)?;
        Ok(Self::Example2 { a, s, beta })
    }

    pub fn example2_dual(a: f64, s: f64, beta: f64) -> Result<Self> {
        GammaExp::new(a, s, beta)?;
        Ok(Self::Example2Dual { a, s, beta })
    }

    pub fn example3_moments(a: f64, beta: f64) -> Result<Self> {
        LampertiKilled::new(a, beta)?;
        Ok(Self::Example3Moments { a, beta })
    }

    pub fn example3_beta1(a: f64) -> Result<Self> {
        LampertiKilled::new(a, 1.0)?;
        Ok(Self::Example3Beta1 { a })
    }

    /// The closed-form law of `spec`'s exponential functional, when there is one.
    pub fn matching(spec: &SubordinatorSpec) -> Option<Self> {
        let (c, q) = (spec.drift(), spec.kill());
        let file = spec.to_file();
        let param = |key: &str| file.tail.params.get(key).and_then(|v| v.as_f64());
        match file.tail.variant.as_str() {
            "zero" => Self::example1(c, q).ok(),
            "gamma_exp" if c == 0.0 && q == 0.0 => {
                Self::example2(param("a")?, param("s")?, param("beta")?).ok()
            }
            "lamperti_killed" if c == 0.0 => {
                let (a, beta) = (param("a")?, param("beta")?);
                let natural = LampertiKilled::new(a, beta).ok()?.natural_kill();
                if (q / natural - 1.0).abs() > 1e-12 {
                    return None;
                }
                if beta == 1.0 && a == 0.5 {
                    Self::example3_beta1(a).ok()
                } else {
                    Self::example3_moments(a, beta).ok()
                }
            }
            "tilted" if q == 0.0 => {
                let base = file.tail.params.get("base")?;
                if base.get("variant")?.as_str()? != "zero" {
                    return None;
                }
                Self::example1_tilted(c, param("kill")?, param("rho")?).ok()
            }
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Example1 { .. } => "example1",
            Self::Example1Tilted { .. } => "example1_tilted",
            Self::Example2 { .. } => "example2",
            Self::Example2Dual { .. } => "example2_dual",
            Self::Example3Moments { .. } => "example3_moments",
            Self::Example3Beta1 { .. } => "example3_beta1",
        }
    }

    /// The model whose exponential functional has this law, when there is one.
    pub fn model(&self) -> Option<SubordinatorSpec> {
        match *self {
            Self::Example1 { c, q } => SubordinatorSpec::drift_only(c, q).ok(),
            Self::Example1Tilted { c, q, rho } => {
                rho_tilt(&SubordinatorSpec::drift_only(c, q).ok()?, rho).ok()
            }
            Self::Example2 { a, s, beta } => {
                SubordinatorSpec::with_tail(0.0, 0.0, GammaExp::new(a, s, beta).ok()?).ok()
            }
            Self::Example2Dual { .. } => None,
            Self::Example3Moments { a, beta } => {
                let t = LampertiKilled::new(a, beta).ok()?;
                SubordinatorSpec::with_tail(0.0, t.natural_kill(), t).ok()
            }
            Self::Example3Beta1 { a } => Self::Example3Moments { a, beta: 1.0 }.model(),
        }
    }

    /// `(lo, hi)` with the density vanishing outside.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Self::Example1 { c, .. } | Self::Example1Tilted { c, .. } => (0.0, 1.0 / c),
            _ => (0.0, f64::INFINITY),
        }
    }

    pub fn has_density(&self) -> bool {
        match *self {
            Self::Example3Moments { .. } => false,
            Self::Example3Beta1 { a } => a == 0.5,
            _ => true,
        }
    }

    pub fn density(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::Domain("density at NaN".into()));
        }
        let (lo, hi) = self.support();
        if !(x > lo && x < hi) {
            if matches!(self, Self::Example1 { .. } | Self::Example1Tilted { .. }) {
                return Err(Error::Domain(format!(
                    "{x} lies outside the support ({lo}, {hi})"
                )));
            }
            return Ok(0.0);
        }
        Ok(match *self {
            Self::Example1 { c, q } => q * (1.0 - c * x).powf(q / c - 1.0),
            Self::Example1Tilted { c, q, rho } => {
                let r = q / c;
                let ln_norm = (rho + 1.0) * c.ln() + ln_gamma(rho + r + 1.0)
                    - ln_gamma(rho + 1.0)
                    - ln_gamma(r);
                (ln_norm + rho * x.ln() + (r - 1.0) * (-c * x).ln_1p()).exp()
            }
            Self::Example2 { a, s, beta } => {
                let ln = (s / a) * beta.ln() - a.ln() - ln_gamma(s) + ((s - a) / a) * x.ln()
                    - (beta * x).powf(1.0 / a);
                ln.exp()
            }
            Self::Example2Dual { a, s, beta } => {
                let ln = ((s - a) / a) * beta.ln()
                    - a.ln()
                    - ln_gamma(s - a)
                    - (s / a) * x.ln()
                    - (beta / x).powf(1.0 / a);
                ln.exp()
            }
            Self::Example3Beta1 { a: 0.5 } => (-x * x / 4.0).exp() / PI.sqrt(),
            _ => {
                return Err(Error::Domain(format!(
                    "{} has no closed-form density",
                    self.name()
                )));
            }
        })
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::Domain("distribution function at NaN".into()));
        }
        let (lo, hi) = self.support();
        if x <= lo {
            return Ok(0.0);
        }
        if x >= hi {
            return Ok(1.0);
        }
        Ok(match *self {
            Self::Example1 { c, q } => -((q / c) * (-c * x).ln_1p()).exp_m1(),
            Self::Example1Tilted { c, q, rho } => beta_reg(rho + 1.0, q / c, c * x),
            Self::Example2 { a, s, beta } => gamma_lr(s, (beta * x).powf(1.0 / a)),
            Self::Example2Dual { a, s, beta } => gamma_ur(s - a, (beta / x).powf(1.0 / a)),
            Self::Example3Beta1 { a: 0.5 } => erf(x / 2.0),
            _ => {
                return Err(Error::Domain(format!(
                    "{} has no closed-form distribution function",
                    self.name()
                )));
            }
        })
    }

    /// `E[I^r]` for real `r` where finite.
    pub fn moment(&self, r: f64) -> Result<f64> {
        let finite = |v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(v)
            } else {
                Err(Error::Domain(format!(
                    "{} has no finite moment of order {r}",
                    self.name()
                )))
            }
        };
        if r == 0.0 {
            return Ok(1.0);
        }
        match *self {
            Self::Example1 { c, q } => {
                if r <= -1.0 {
                    return finite(f64::INFINITY);
                }
                finite(c.powf(-r) * gamma(1.0 + r) * gamma_ratio(1.0 + q / c, 1.0 + r + q / c))
            }
            Self::Example1Tilted { c, q, rho } => {
                if r <= -rho - 1.0 {
                    return finite(f64::INFINITY);
                }
                let p = rho + 1.0;
                finite(c.powf(-r) * gamma_ratio(p + r, p) * gamma_ratio(p + q / c, p + q / c + r))
            }
            Self::Example2 { a, s, beta } => {
                if a * r + s <= 0.0 {
                    return finite(f64::INFINITY);
                }
                finite(beta.powf(-r) * gamma_ratio(a * r + s, s))
            }
            Self::Example2Dual { a, s, beta } => {
                if s - a - a * r <= 0.0 {
                    return finite(f64::INFINITY);
                }
                finite(beta.powf(r) * gamma_ratio(s - a - a * r, s - a))
            }
            Self::Example3Moments { a, beta } => {
                if r <= -1.0 {
                    return finite(f64::INFINITY);
                }
                finite(gamma(1.0 + r) * gamma_ratio(beta, a * r + beta))
            }
            Self::Example3Beta1 { a } => Self::Example3Moments { a, beta: 1.0 }.moment(r),
        }
    }
}

impl FractionalMoments for ReferenceLaw {
    fn fractional_moment(&self, order: f64) -> Result<f64> {
        self.moment(order)
    }

    fn provenance(&self) -> Provenance {
        Provenance::ClosedForm
    }
}

/// Density of the exponential functional of the spectrally negative dual of
/// the `ρ`-tilted pure drift: the law of `c / B(ρ, q/c)`, supported on `(c, ∞)`.
pub fn example1_dual_density(c: f64, q: f64, rho: f64, x: f64) -> Result<f64> {
    need(c > 0.0 && q > 0.0 && rho > 0.0, || {
        format!("example 1 dual needs c, q, rho > 0 (got {c}, {q}, {rho})")
    })?;
    if !(x > c) {
        return Ok(0.0);
    }
    let r = q / c;
    let ln = (rho / (c * rho + q)).ln() + (rho + 1.0) * c.ln() + ln_gamma(rho + r + 1.0)
        - ln_gamma(rho + 1.0)
        - ln_gamma(r)
        - (rho + r) * x.ln()
        + (r - 1.0) * (x - c).ln();
    Ok(ln.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laws_are_recognised_from_models() {
        for law in [
            ReferenceLaw::example1(1.0, 2.0).unwrap(),
            ReferenceLaw::example1_tilted(1.0, 2.0, 1.0).unwrap(),
            ReferenceLaw::example2(0.5, 1.0, 1.0).unwrap(),
            ReferenceLaw::example3_moments(0.5, 2.0).unwrap(),
            ReferenceLaw::example3_beta1(0.5).unwrap(),
        ] {
            assert_eq!(ReferenceLaw::matching(&law.model().unwrap()), Some(law));
        }
        let off =
            SubordinatorSpec::with_tail(0.0, 0.3, LampertiKilled::new(0.5, 1.0).unwrap()).unwrap();
        assert_eq!(ReferenceLaw::matching(&off), None);
        let drifted =
            SubordinatorSpec::with_tail(1.0, 0.0, GammaExp::new(1.0, 1.5, 2.0).unwrap()).unwrap();
        assert_eq!(ReferenceLaw::matching(&drifted), None);
    }
    use crate::levy_model::positive_moments;
    use crate::numerics::QuadratureRequest;
    use approx::assert_relative_eq;

    fn mass(law: &ReferenceLaw) -> f64 {
        let (lo, hi) = law.support();
        if hi.is_finite() {
            // integrate from the right end too, where Beta laws may be singular
            let mid = 0.5 * (lo + hi);
            let left = QuadratureRequest::new(|x| law.density(x).unwrap_or(0.0), lo, mid)
                .integrate()
                .unwrap()
                .value;
            let right =
                QuadratureRequest::new(|t| law.density(hi - t).unwrap_or(0.0), 0.0, hi - mid)
                    .tolerances(1e-9, 1e-7)
                    .singularity(match law {
                        ReferenceLaw::Example1 { c, q }
                        | ReferenceLaw::Example1Tilted { c, q, .. }
                            if q < c =>
                        {
                            Some(q / c - 1.0)
                        }
                        _ => None,
                    })
                    .integrate()
                    .unwrap()
                    .value;
            left + right
        } else {
            QuadratureRequest::new(|x| law.density(x).unwrap(), 0.0, f64::INFINITY)
                .integrate()
                .unwrap()
                .value
        }
    }

    #[test]
    fn examples_at_points() {
        let u = ReferenceLaw::example1(1.0, 1.0).unwrap();
        assert_relative_eq!(u.density(0.3).unwrap(), 1.0);
        assert!(u.density(1.2).is_err());
        assert_relative_eq!(
            ReferenceLaw::example1(1.0, 2.0)
                .unwrap()
                .density(0.5)
                .unwrap(),
            1.0
        );
        let g = ReferenceLaw::example2(1.0, 1.5, 2.0).unwrap();
        assert_relative_eq!(
            g.density(1.0).unwrap(),
            2f64.powf(2.5) / PI.sqrt() * (-2.0f64).exp(),
            max_relative = 1e-13
        );
        assert_relative_eq!(g.density(1.0).unwrap(), 0.431_928, max_relative = 1e-5);
        let h = ReferenceLaw::example2(0.5, 1.0, 1.0).unwrap();
        assert_relative_eq!(
            h.density(1.0).unwrap(),
            2.0 * (-1.0f64).exp(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn densities_have_unit_mass() {
        let laws = [
            ReferenceLaw::example1(1.0, 1.0).unwrap(),
            ReferenceLaw::example1(1.0, 3.0).unwrap(),
            ReferenceLaw::example1_tilted(1.0, 1.0, 1.0).unwrap(),
            ReferenceLaw::example1_tilted(0.5, 0.2, 2.5).unwrap(),
            ReferenceLaw::example2(1.0, 1.5, 2.0).unwrap(),
            ReferenceLaw::example2(0.5, 1.0, 1.0).unwrap(),
            ReferenceLaw::example2(0.3, 0.9, 2.5).unwrap(),
            ReferenceLaw::example2_dual(1.0, 1.5, 2.0).unwrap(),
            ReferenceLaw::example2_dual(0.5, 1.0, 1.0).unwrap(),
            ReferenceLaw::example3_beta1(0.5).unwrap(),
        ];
        for law in laws {
            assert!((mass(&law) - 1.0).abs() <= 1e-9, "{law:?}: {}", mass(&law));
        }
    }

    #[test]
    fn singular_beta_law_has_unit_mass() {
        // (1 - cx) cancels near 1/c, so only ~1e-7 is reachable by quadrature here
        let law = ReferenceLaw::example1(2.0, 0.5).unwrap();
        assert!((mass(&law) - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn distribution_functions_match_densities() {
        let laws = [
            ReferenceLaw::example1(1.0, 2.0).unwrap(),
            ReferenceLaw::example1_tilted(1.0, 1.0, 1.0).unwrap(),
            ReferenceLaw::example2(1.0, 1.5, 2.0).unwrap(),
            ReferenceLaw::example2(0.5, 1.0, 1.0).unwrap(),
            ReferenceLaw::example2_dual(0.5, 1.0, 1.0).unwrap(),
            ReferenceLaw::example3_beta1(0.5).unwrap(),
        ];
        for law in laws {
            for (x0, x1) in [(0.1, 0.3), (0.3, 0.8)] {
                let integral = QuadratureRequest::new(|x| law.density(x).unwrap(), x0, x1)
                    .integrate()
                    .unwrap()
                    .value;
                assert_relative_eq!(
                    law.cdf(x1).unwrap() - law.cdf(x0).unwrap(),
                    integral,
                    max_relative = 1e-9
                );
            }
        }
    }

    #[test]
    fn moments_agree_with_recursion() {
        for (a, s, beta) in [(1.0, 1.5, 2.0), (0.5, 1.0, 1.0), (0.3, 0.9, 2.5)] {
            let law = ReferenceLaw::example2(a, s, beta).unwrap();
            let rec = positive_moments(&law.model().unwrap(), 6).unwrap().values();
            for n in 0..=6 {
                assert_relative_eq!(law.moment(n as f64).unwrap(), rec[n], max_relative = 1e-9);
            }
        }
        let e1 = ReferenceLaw::example1(1.0, 1.0).unwrap();
        let rec = positive_moments(&e1.model().unwrap(), 6).unwrap().values();
        for n in 0..=6 {
            assert_relative_eq!(e1.moment(n as f64).unwrap(), rec[n], max_relative = 1e-12);
        }
        let t = ReferenceLaw::example1_tilted(1.0, 2.0, 0.7).unwrap();
        let rec = positive_moments(&t.model().unwrap(), 6).unwrap().values();
        for n in 0..=6 {
            assert_relative_eq!(t.moment(n as f64).unwrap(), rec[n], max_relative = 1e-9);
        }
    }

    #[test]
    fn example3_moments() {
        let law = ReferenceLaw::example3_moments(0.5, 1.0).unwrap();
        assert_relative_eq!(law.moment(2.0).unwrap(), 2.0, max_relative = 1e-14);
        for a in [0.2, 0.5, 0.8] {
            let l = ReferenceLaw::example3_beta1(a).unwrap();
            assert_eq!(l.moment(0.0).unwrap(), 1.0);
            // E[(X_a^{-a})^n] = E[X_a^{-an}] = Γ(1 + n)/Γ(1 + an)
            for n in 1..6 {
                let nn = n as f64;
                let stable = gamma(1.0 + nn) / gamma(1.0 + a * nn);
                assert_relative_eq!(l.moment(nn).unwrap(), stable, max_relative = 1e-12);
            }
        }
        let rec = positive_moments(&law.model().unwrap(), 5).unwrap().values();
        for n in 0..=5 {
            assert_relative_eq!(law.moment(n as f64).unwrap(), rec[n], max_relative = 1e-10);
        }
        // half-normal moments against quadrature
        let half = ReferenceLaw::example3_beta1(0.5).unwrap();
        for r in [0.5, 1.0, 3.0] {
            let q = QuadratureRequest::new(
                |x: f64| x.powf(r) * half.density(x).unwrap(),
                0.0,
                f64::INFINITY,
            )
            .integrate()
            .unwrap()
            .value;
            assert_relative_eq!(half.moment(r).unwrap(), q, max_relative = 1e-9);
        }
        assert!(ReferenceLaw::example3_moments(0.5, 1.0)
            .unwrap()
            .density(1.0)
            .is_err());
        assert!(ReferenceLaw::example3_moments(0.5, 0.5).is_err());
    }

    #[test]
    fn dual_of_tilted_drift_is_beta_reciprocal() {
        let (c, q, rho): (f64, f64, f64) = (1.0, 2.0, 1.5);
        // c / B(ρ, q/c): density of 1/B scaled
        for x in [1.1, 1.5, 3.0, 10.0] {
            let b = c / x;
            let beta_density = b.powf(rho - 1.0) * (1.0 - b).powf(q / c - 1.0) * gamma(rho + q / c)
                / (gamma(rho) * gamma(q / c));
            let expect = beta_density * c / (x * x);
            assert_relative_eq!(
                example1_dual_density(c, q, rho, x).unwrap(),
                expect,
                max_relative = 1e-12
            );
        }
        assert_eq!(example1_dual_density(c, q, rho, 0.5).unwrap(), 0.0);
    }
}
