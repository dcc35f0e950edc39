//! Built-in tail families.

use std::f64::consts::LN_2;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::tail::TailModel;
use crate::error::{Error, Result};
use crate::numerics::special::{digamma, gamma, gamma_ratio, gamma_shift_ratio, gamma_ur};
use crate::numerics::QuadratureRequest;

fn to_params<T: Serialize>(value: &T) -> Map<String, Value> {
    match serde_json::to_value(value) {
        Ok(Value::Object(map)) => map,
        _ => Map::new(),
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidSpec(msg()))
    }
}

/// No jumps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Zero {}

impl TailModel for Zero {
    fn name(&self) -> &'static str {
        "zero"
    }
    fn params(&self) -> Map<String, Value> {
        Map::new()
    }
    fn eval(&self, _z: f64) -> f64 {
        0.0
    }
    fn total_mass(&self) -> f64 {
        0.0
    }
    fn decay_rate(&self) -> f64 {
        f64::INFINITY
    }
    fn jump_exponent(&self, _lambda: f64) -> Option<f64> {
        Some(0.0)
    }
    fn mean_jump(&self) -> Option<f64> {
        Some(0.0)
    }
    fn is_zero(&self) -> bool {
        true
    }
}

/// `Π(dx) = x^{-1-a} dx`, so `Π̄(z) = z^{-a} / a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stable {
    pub a: f64,
}

impl Stable {
    pub fn new(a: f64) -> Result<Self> {
        check(a > 0.0 && a < 1.0, || {
            format!("stable index a = {a} must lie in (0, 1)")
        })?;
        Ok(Self { a })
    }
}

impl TailModel for Stable {
    fn name(&self) -> &'static str {
        "stable"
    }
    fn params(&self) -> Map<String, Value> {
        to_params(self)
    }
    fn eval(&self, z: f64) -> f64 {
        z.powf(-self.a) / self.a
    }
    fn total_mass(&self) -> f64 {
        f64::INFINITY
    }
    fn singularity(&self) -> Option<f64> {
        Some(-self.a)
    }
    fn decay_rate(&self) -> f64 {
        0.0
    }
    fn jump_exponent(&self, lambda: f64) -> Option<f64> {
        if lambda < 0.0 {
            return None;
        }
        Some(gamma(1.0 - self.a) * lambda.powf(self.a) / self.a)
    }
    fn mean_jump(&self) -> Option<f64> {
        Some(f64::INFINITY)
    }
    fn inverse(&self, v: f64) -> Option<f64> {
        Some((self.a * v).powf(-1.0 / self.a))
    }
}

/// Tail of `log` of a power of a gamma variable:
/// `Π̄(z) = β/Γ(a+1) · e^{-(s-1)z/a} (e^{z/a} - 1)^{a-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaExp {
    pub a: f64,
    pub s: f64,
    pub beta: f64,
}

impl GammaExp {
    pub fn new(a: f64, s: f64, beta: f64) -> Result<Self> {
        check(a > 0.0 && a <= 1.0, || {
            format!("gamma_exp a = {a} must lie in (0, 1]")
        })?;
        check(s > a, || {
            format!("gamma_exp needs s > a, got s = {s}, a = {a}")
        })?;
        check(beta > 0.0 && beta.is_finite(), || {
            format!("gamma_exp beta = {beta} must be positive")
        })?;
        Ok(Self { a, s, beta })
    }

    fn ln_scale(&self) -> f64 {
        self.beta.ln() - crate::numerics::special::ln_gamma(self.a + 1.0)
    }
}

impl TailModel for GammaExp {
    fn name(&self) -> &'static str {
        "gamma_exp"
    }
    fn params(&self) -> Map<String, Value> {
        to_params(self)
    }
    fn eval(&self, z: f64) -> f64 {
        let a = self.a;
        let mut ln = self.ln_scale() - (self.s - a) / a * z;
        if a < 1.0 {
            ln += (a - 1.0) * (-(-z / a).exp_m1()).ln();
        }
        ln.exp()
    }
    fn total_mass(&self) -> f64 {
        if self.a < 1.0 {
            f64::INFINITY
        } else {
            self.beta
        }
    }
    fn singularity(&self) -> Option<f64> {
        (self.a < 1.0).then_some(self.a - 1.0)
    }
    fn decay_rate(&self) -> f64 {
        (self.s - self.a) / self.a
    }
    fn jump_exponent(&self, lambda: f64) -> Option<f64> {
        let lo = self.a * (lambda - 1.0) + self.s;
        if lo <= 0.0 {
            return None;
        }
        if lambda == 0.0 {
            return Some(0.0);
        }
        // Γ(aλ+s)/Γ(aλ-a+s) = gamma_shift_ratio(lo, a)
        Some(self.beta * lambda / gamma_shift_ratio(lo, self.a))
    }
    fn mean_jump(&self) -> Option<f64> {
        Some(self.beta * gamma_ratio(self.s - self.a, self.s))
    }
    fn inverse(&self, v: f64) -> Option<f64> {
        if self.a < 1.0 {
            return None;
        }
        Some((self.beta / v).ln() / (self.s - 1.0))
    }
}

/// `Π̄(z) = rate · e^{-decay · z}`; exponentially distributed jumps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompoundPoissonExp {
    pub rate: f64,
    pub decay: f64,
}

impl CompoundPoissonExp {
    pub fn new(rate: f64, decay: f64) -> Result<Self> {
        check(rate > 0.0 && rate.is_finite(), || {
            format!("jump rate {rate} must be positive")
        })?;
        check(decay > 0.0 && decay.is_finite(), || {
            format!("decay {decay} must be positive")
        })?;
        Ok(Self { rate, decay })
    }
}

impl TailModel for CompoundPoissonExp {
    fn name(&self) -> &'static str {
        "compound_poisson_exp"
    }
    fn params(&self) -> Map<String, Value> {
        to_params(self)
    }
    fn eval(&self, z: f64) -> f64 {
        self.rate * (-self.decay * z).exp()
    }
    fn total_mass(&self) -> f64 {
        self.rate
    }
    fn decay_rate(&self) -> f64 {
        self.decay
    }
    fn jump_exponent(&self, lambda: f64) -> Option<f64> {
        (lambda > -self.decay).then(|| self.rate * lambda / (lambda + self.decay))
    }
    fn mean_jump(&self) -> Option<f64> {
        Some(self.rate / self.decay)
    }
    fn inverse(&self, v: f64) -> Option<f64> {
        Some((self.rate / v).ln() / self.decay)
    }
}

/// Jump tail of the Lamperti transform of a killed stable-type process:
/// `Π̄(z) = 1/Γ(1-a) ∫_z^∞ e^{(1+a-β)x/a} (e^{x/a} - 1)^{-(1+a)} dx`.
///
/// Evaluated after the change of variables `t = e^{-x/a}`, which turns it into
/// `a/Γ(1-a) ∫_0^{e^{-z/a}} t^{β-1} (1-t)^{-1-a} dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LampertiKilled {
    pub a: f64,
    pub beta: f64,
}

impl LampertiKilled {
    pub fn new(a: f64, beta: f64) -> Result<Self> {
        check(a > 0.0 && a < 1.0, || {
            format!("lamperti_killed a = {a} must lie in (0, 1)")
        })?;
        check(beta > a && beta.is_finite(), || {
            format!("lamperti_killed needs beta > a, got beta = {beta}, a = {a}")
        })?;
        Ok(Self { a, beta })
    }

    /// Killing rate `Γ(β)/Γ(β-a)` that makes the exponential functional
    /// have the closed-form moments `n! Γ(β) / Γ(an + β)`.
    pub fn natural_kill(&self) -> f64 {
        gamma_shift_ratio(self.beta - self.a, self.a)
    }

    fn integral(&self, z: f64) -> f64 {
        let (a, b) = (self.a, self.beta);
        let top = (-z / a).exp();
        if top <= 0.0 {
            return 0.0;
        }
        let tol = (1e-11, f64::MIN_POSITIVE);
        let lower_end = top.min(0.5);
        let lower = QuadratureRequest::new(
            |t: f64| t.powf(b - 1.0) * (1.0 - t).powf(-1.0 - a),
            0.0,
            lower_end,
        )
        .tolerances(tol.0, tol.1)
        .singularity((b < 1.0).then_some(b - 1.0))
        .integrate()
        .map(|e| e.value)
        .unwrap_or(f64::NAN);
        if top <= 0.5 {
            return lower;
        }
        // w = 1 - t = e^v, v from ln(1 - top) up to -ln 2.
        let v_lo = (-(-z / a).exp_m1()).ln();
        let upper = QuadratureRequest::new(
            |v: f64| (-v.exp_m1()).powf(b - 1.0) * (-a * v).exp(),
            v_lo,
            -LN_2,
        )
        .tolerances(tol.0, tol.1)
        .integrate()
        .map(|e| e.value)
        .unwrap_or(f64::NAN);
        lower + upper
    }
}

impl TailModel for LampertiKilled {
    fn name(&self) -> &'static str {
        "lamperti_killed"
    }
    fn params(&self) -> Map<String, Value> {
        to_params(self)
    }
    fn eval(&self, z: f64) -> f64 {
        self.a / gamma(1.0 - self.a) * self.integral(z)
    }
    fn total_mass(&self) -> f64 {
        f64::INFINITY
    }
    fn singularity(&self) -> Option<f64> {
        Some(-self.a)
    }
    fn decay_rate(&self) -> f64 {
        self.beta / self.a
    }
    fn jump_exponent(&self, lambda: f64) -> Option<f64> {
        let x = self.a * lambda + self.beta - self.a;
        if x <= 0.0 || lambda <= -self.decay_rate() {
            return None;
        }
        Some(gamma_shift_ratio(x, self.a) - self.natural_kill())
    }
    fn mean_jump(&self) -> Option<f64> {
        let (a, b) = (self.a, self.beta);
        Some(a * self.natural_kill() * (digamma(b) - digamma(b - a)))
    }
    fn probe_point(&self) -> f64 {
        // Ratios converge like e^{-x/a}; keep Π̄ well above underflow.
        (20.0 * self.a).max(5.0)
    }
}

/// `Π(dx) = x^{-b} e^{-x^n} dx`, so `Π̄(z) = Γ((1-b)/n, z^n) / n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StretchedExp {
    pub b: f64,
    pub n: u32,
}

impl StretchedExp {
    pub fn new(b: f64, n: u32) -> Result<Self> {
        check(b > 0.0 && b < 1.0, || {
            format!("stretched_exp b = {b} must lie in (0, 1)")
        })?;
        check((1..=3).contains(&n), || {
            format!("stretched_exp n = {n} must be 1, 2 or 3")
        })?;
        Ok(Self { b, n })
    }

    fn shape(&self) -> f64 {
        (1.0 - self.b) / f64::from(self.n)
    }
}

impl TailModel for StretchedExp {
    fn name(&self) -> &'static str {
        "stretched_exp"
    }
    fn params(&self) -> Map<String, Value> {
        to_params(self)
    }
    fn eval(&self, z: f64) -> f64 {
        let nu = self.shape();
        gamma(nu) * gamma_ur(nu, z.powi(self.n as i32)) / f64::from(self.n)
    }
    fn total_mass(&self) -> f64 {
        gamma(self.shape()) / f64::from(self.n)
    }
    fn decay_rate(&self) -> f64 {
        if self.n == 1 {
            1.0
        } else {
            f64::INFINITY
        }
    }
    fn jump_exponent(&self, lambda: f64) -> Option<f64> {
        (self.n == 1 && lambda > -1.0)
            .then(|| gamma(1.0 - self.b) * (1.0 - (1.0 + lambda).powf(self.b - 1.0)))
    }
    fn mean_jump(&self) -> Option<f64> {
        let n = f64::from(self.n);
        Some(gamma((2.0 - self.b) / n) / n)
    }
    fn probe_point(&self) -> f64 {
        if self.n == 1 {
            50.0
        } else {
            5.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TabulatedParams {
    knots: Vec<[f64; 2]>,
    #[serde(default = "default_fit_knots")]
    fit_knots: usize,
}

fn default_fit_knots() -> usize {
    3
}

/// Tail given by knots `(z_i, Π̄(z_i))`.
///
/// Log-linear between knots, flat below the first knot, and `Π̄(z_last)
/// e^{-r(z - z_last)}` beyond the last one, where `r` is the least-squares
/// decay rate of `ln Π̄` over the last `fit_knots` knots.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    z: Vec<f64>,
    ln_tail: Vec<f64>,
    fit_knots: usize,
    rate: f64,
}

impl Tabulated {
    pub fn new(knots: &[[f64; 2]], fit_knots: usize) -> Result<Self> {
        check(knots.len() >= 2, || {
            "tabulated tail needs at least two knots".into()
        })?;
        check(fit_knots >= 2 && fit_knots <= knots.len(), || {
            format!("fit_knots = {fit_knots} must lie in [2, {}]", knots.len())
        })?;
        for (i, k) in knots.iter().enumerate() {
            check(k[0] > 0.0 && k[0].is_finite(), || {
                format!("knot {i}: z = {} must be positive", k[0])
            })?;
            check(k[1] > 0.0 && k[1].is_finite(), || {
                format!("knot {i}: tail value {} must be positive", k[1])
            })?;
            if i > 0 {
                let p = knots[i - 1];
                check(k[0] > p[0], || format!("knot {i}: abscissae must increase"))?;
                check(k[1] <= p[1], || {
                    format!("knot {i}: tail values must not increase")
                })?;
            }
        }
        let z: Vec<f64> = knots.iter().map(|k| k[0]).collect();
        let ln_tail: Vec<f64> = knots.iter().map(|k| k[1].ln()).collect();
        let fit = z.len() - fit_knots..z.len();
        let m = fit_knots as f64;
        let zm = z[fit.clone()].iter().sum::<f64>() / m;
        let lm = ln_tail[fit.clone()].iter().sum::<f64>() / m;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for i in fit {
            sxy += (z[i] - zm) * (ln_tail[i] - lm);
            sxx += (z[i] - zm).powi(2);
        }
        let rate = -sxy / sxx;
        check(rate > 0.0, || {
            format!("fitted tail decay rate {rate} is not positive; extrapolation would not vanish")
        })?;
        Ok(Self {
            z,
            ln_tail,
            fit_knots,
            rate,
        })
    }

    pub fn fitted_rate(&self) -> f64 {
        self.rate
    }

    fn last(&self) -> (f64, f64) {
        let n = self.z.len() - 1;
        (self.z[n], self.ln_tail[n])
    }
}

impl TailModel for Tabulated {
    fn name(&self) -> &'static str {
        "tabulated"
    }
    fn params(&self) -> Map<String, Value> {
        let knots = self
            .z
            .iter()
            .zip(&self.ln_tail)
            .map(|(&z, &l)| [z, l.exp()])
            .collect();
        to_params(&TabulatedParams {
            knots,
            fit_knots: self.fit_knots,
        })
    }
    fn eval(&self, z: f64) -> f64 {
        if z <= self.z[0] {
            return self.ln_tail[0].exp();
        }
        let (zl, ll) = self.last();
        if z >= zl {
            return (ll - self.rate * (z - zl)).exp();
        }
        let i = self.z.partition_point(|&k| k <= z) - 1;
        let w = (z - self.z[i]) / (self.z[i + 1] - self.z[i]);
        (self.ln_tail[i] + w * (self.ln_tail[i + 1] - self.ln_tail[i])).exp()
    }
    fn total_mass(&self) -> f64 {
        self.ln_tail[0].exp()
    }
    fn decay_rate(&self) -> f64 {
        self.rate
    }
    fn mean_jump(&self) -> Option<f64> {
        let mut sum = self.z[0] * self.ln_tail[0].exp();
        for i in 0..self.z.len() - 1 {
            let h = self.z[i + 1] - self.z[i];
            let (l0, l1) = (self.ln_tail[i], self.ln_tail[i + 1]);
            let d = l1 - l0;
            sum += if d.abs() < 1e-12 {
                h * l0.exp()
            } else {
                h * (l1.exp() - l0.exp()) / d
            };
        }
        let (_, ll) = self.last();
        Some(sum + ll.exp() / self.rate)
    }
    fn inverse(&self, v: f64) -> Option<f64> {
        let lv = v.ln();
        if lv >= self.ln_tail[0] {
            return Some(self.z[0]);
        }
        let (zl, ll) = self.last();
        if lv <= ll {
            return Some(zl + (ll - lv) / self.rate);
        }
        // ln_tail is nonincreasing: find the segment bracketing lv.
        let i = self.ln_tail.partition_point(|&l| l > lv).max(1) - 1;
        let (l0, l1) = (self.ln_tail[i], self.ln_tail[i + 1]);
        let w = if l0 == l1 { 0.0 } else { (l0 - lv) / (l0 - l1) };
        Some(self.z[i] + w * (self.z[i + 1] - self.z[i]))
    }
    fn probe_point(&self) -> f64 {
        2.0 * self.last().0
    }
}

/// Exponential tilt of another tail plus a killing term:
/// `Π̄(z) = e^{-ρz} (Π̄_base(z) + kill)`.
#[derive(Debug, Clone)]
pub struct Tilted {
    base: Arc<dyn TailModel>,
    rho: f64,
    kill: f64,
}

impl Tilted {
    pub fn new(base: Arc<dyn TailModel>, rho: f64, kill: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::Domain(format!("tilt rho = {rho} must be positive")));
        }
        check(kill >= 0.0 && kill.is_finite(), || {
            format!("tilt kill = {kill} must be nonnegative")
        })?;
        Ok(Self { base, rho, kill })
    }

    pub fn base(&self) -> &Arc<dyn TailModel> {
        &self.base
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn kill(&self) -> f64 {
        self.kill
    }
}

impl TailModel for Tilted {
    fn name(&self) -> &'static str {
        "tilted"
    }
    fn params(&self) -> Map<String, Value> {
        let mut base = self.base.params();
        base.insert("variant".into(), Value::from(self.base.name()));
        let mut map = Map::new();
        map.insert("base".into(), Value::Object(base));
        map.insert("rho".into(), Value::from(self.rho));
        map.insert("kill".into(), Value::from(self.kill));
        map
    }
    fn eval(&self, z: f64) -> f64 {
        let base = if self.base.is_zero() {
            0.0
        } else {
            self.base.eval(z)
        };
        (-self.rho * z).exp() * (base + self.kill)
    }
    fn total_mass(&self) -> f64 {
        self.base.total_mass() + self.kill
    }
    fn singularity(&self) -> Option<f64> {
        self.base.singularity()
    }
    fn decay_rate(&self) -> f64 {
        if self.kill > 0.0 {
            self.rho
        } else {
            self.base.decay_rate() + self.rho
        }
    }
    fn jump_exponent(&self, lambda: f64) -> Option<f64> {
        let shifted = lambda + self.rho;
        if shifted <= 0.0 {
            return None;
        }
        let base = self.base.jump_exponent(shifted)?;
        Some(lambda * (base + self.kill) / shifted)
    }
    fn mean_jump(&self) -> Option<f64> {
        let base = self.base.jump_exponent(self.rho)?;
        Some((base + self.kill) / self.rho)
    }
    fn probe_point(&self) -> f64 {
        self.base.probe_point()
    }
    fn is_zero(&self) -> bool {
        self.base.is_zero() && self.kill == 0.0
    }
}
