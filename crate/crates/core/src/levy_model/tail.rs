use std::fmt;

use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// One family of Lévy tails `Π̄(z) = Π(z, ∞)`.
///
/// Implementations are immutable and shared behind `Arc`. Only [`eval`],
/// [`total_mass`] and [`decay_rate`] are mandatory; everything else has a
/// quadrature-backed fallback in [`crate::levy_model::SubordinatorSpec`].
///
/// [`eval`]: TailModel::eval
/// [`total_mass`]: TailModel::total_mass
/// [`decay_rate`]: TailModel::decay_rate
pub trait TailModel: fmt::Debug + Send + Sync {
    /// Registry key; also the `variant` field of a model file.
    fn name(&self) -> &'static str;

    /// Parameters as written in a model file, without the `variant` key.
    fn params(&self) -> Map<String, Value>;

    /// `Π̄(z)` for `z > 0`. Callers check the domain.
    fn eval(&self, z: f64) -> f64;

    /// `Π(0, ∞) = Π̄(0+)`; infinite for infinite-activity tails.
    fn total_mass(&self) -> f64;

    /// Exponent `p ∈ (-1, 0)` with `Π̄(z) ≍ z^p` as `z ↓ 0`, if `Π̄` is unbounded there.
    fn singularity(&self) -> Option<f64> {
        None
    }

    /// The `α` of the class `L_α`: `Π̄(x + y) / Π̄(x) → e^{-αy}`. Infinite for
    /// super-exponential tails. The Laplace exponent extends to `(-α, ∞)`.
    fn decay_rate(&self) -> f64;

    /// Closed form of the jump part `λ ∫₀^∞ e^{-λu} Π̄(u) du`, if known.
    fn jump_exponent(&self, _lambda: f64) -> Option<f64> {
        None
    }

    /// Closed form of `∫₀^∞ Π̄(u) du = ∫ x Π(dx)` (possibly infinite), if known.
    fn mean_jump(&self) -> Option<f64> {
        None
    }

    /// Closed form of `Π̄⁻¹(v)` for `0 < v < total_mass`, if known.
    fn inverse(&self, _v: f64) -> Option<f64> {
        None
    }

    /// Abscissa at which tail ratios are probed by [`class_index`].
    fn probe_point(&self) -> f64 {
        50.0
    }

    fn is_zero(&self) -> bool {
        false
    }
}

/// One empirical ratio `Π̄(x + y) / Π̄(x)` against its limit `e^{-αy}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailRatio {
    pub offset: f64,
    pub x: f64,
    pub ratio: f64,
    pub ratio_at_double_x: f64,
    pub expected: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassIndex {
    pub alpha: f64,
    pub diagnostics: Vec<TailRatio>,
}

/// Class index `α` of a tail together with empirical tail ratios.
///
/// Fails with [`Error::NotConvergent`] when the ratios at `x` and `2x` differ
/// by more than 10% (unless both are below 0.01).
pub fn class_index(tail: &dyn TailModel, probe_offsets: &[f64]) -> Result<ClassIndex> {
    if tail.is_zero() {
        return Err(Error::Domain(
            "class index of the zero tail is undefined".into(),
        ));
    }
    let alpha = tail.decay_rate();
    let x = tail.probe_point();
    let ratio_at = |x: f64, y: f64| {
        let base = tail.eval(x);
        if base > 0.0 {
            tail.eval(x + y) / base
        } else {
            0.0
        }
    };
    let mut diagnostics = Vec::with_capacity(probe_offsets.len());
    for &y in probe_offsets {
        let ratio = ratio_at(x, y);
        let ratio_at_double_x = ratio_at(2.0 * x, y);
        let expected = if alpha.is_infinite() {
            0.0
        } else {
            (-alpha * y).exp()
        };
        let spread = (ratio - ratio_at_double_x).abs();
        let scale = ratio.abs().max(ratio_at_double_x.abs());
        // Ratios that are both negligible count as settled (super-exponential tails).
        if spread > 0.1 * scale && scale > 0.01 {
            return Err(Error::NotConvergent(format!(
                "{}: ratio {ratio:e} at x = {x} vs {ratio_at_double_x:e} at x = {} for y = {y}",
                tail.name(),
                2.0 * x
            )));
        }
        diagnostics.push(TailRatio {
            offset: y,
            x,
            ratio,
            ratio_at_double_x,
            expected,
        });
    }
    Ok(ClassIndex { alpha, diagnostics })
}
