use super::report::{Probe, ValidationReport};
use crate::density_solver::{GeometricGrid, StepDensity};
use crate::error::{Error, Result};
use crate::levy_model::{
    class_index, dual_sn, negative_moment, FractionalMoments, SubordinatorSpec,
};
use crate::numerics::extrapolate_limit;

pub const SMALL_X_TOLERANCE: f64 = 1e-2;
pub const KILLED_LIMIT_TOLERANCE: f64 = 2e-2;
pub const DUAL_TOLERANCE: f64 = 2e-2;

/// Fewest cells needed below `x_max / 100` for a limit check.
pub const MIN_PROBES: usize = 8;
const MAX_SAMPLES: usize = 24;
const CLASS_OFFSETS: [f64; 3] = [0.5, 1.0, 2.0];

/// Cells of the lowest decade `[x_0, 10 x_0]`, ordered from right to left,
/// thinned to at most 24.
fn lowest_decade(grid: &GeometricGrid) -> Result<Vec<usize>> {
    let bound = grid.x_max() * 1e-2;
    let found = (0..grid.cells())
        .take_while(|&n| grid.midpoint(n) < bound)
        .count();
    let top = 10.0 * grid.node(0);
    let decade = (0..grid.cells())
        .take_while(|&n| grid.midpoint(n) <= top)
        .count();
    if found < MIN_PROBES || decade < MIN_PROBES {
        return Err(Error::InsufficientGrid {
            found: found.min(decade),
            needed: MIN_PROBES,
            bound,
        });
    }
    let count = decade.min(MAX_SAMPLES);
    Ok((0..count)
        .map(|j| (decade - 1) - j * (decade - 1) / (count - 1))
        .collect())
}

/// Abscissa for the extrapolation: `x` itself, or `1/ln(1/x)` when the
/// ratio approaches its limit only logarithmically (`α = 0`).
fn abscissa(alpha: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| {
        if alpha == 0.0 {
            1.0 / (1.0 / x).ln()
        } else {
            x
        }
    }
}

/// Index `α` of the tail and `E[I^{-α}]` with the provenance of its seed.
fn small_x_constant(
    spec: &SubordinatorSpec,
    seed: Option<&dyn FractionalMoments>,
) -> Result<(f64, f64, String)> {
    let alpha = class_index(spec.tail_model().as_ref(), &CLASS_OFFSETS)?.alpha;
    if !alpha.is_finite() {
        return Err(Error::Domain(format!(
            "tail {} decays faster than any exponential; no small-x constant",
            spec.tail_model().name()
        )));
    }
    let entry = negative_moment(spec, alpha, seed)?;
    Ok((alpha, entry.value, entry.provenance.to_string()))
}

/// `k̃(x) / Π̄(log 1/x) → E[I^{-α}]` as `x ↓ 0`, for unkilled models in class `L_α`.
///
/// A fractional `α` needs `seed`, which supplies `E[I^{-(α - ⌊α⌋)}]`.
pub fn small_x_ratio_check(
    spec: &SubordinatorSpec,
    density: &StepDensity,
    seed: Option<&dyn FractionalMoments>,
) -> Result<ValidationReport> {
    if spec.kill() != 0.0 {
        return Err(Error::Domain("small-x ratio check needs q = 0".into()));
    }
    let (alpha, oracle, source) = small_x_constant(spec, seed)?;
    let cells = lowest_decade(density.grid())?;
    let t = abscissa(alpha);
    let mut probes = Vec::with_capacity(cells.len());
    let mut samples = Vec::with_capacity(cells.len());
    for n in cells {
        let x = density.grid().midpoint(n);
        let ratio = density.heights()[n] / spec.tail((1.0 / x).ln())?;
        probes.push(Probe {
            x,
            measured: ratio,
            oracle,
        });
        samples.push((t(x), ratio));
    }
    let limit = extrapolate_limit(&samples)?;
    Ok(ValidationReport::limit(
        "small_x_ratio",
        probes,
        limit,
        oracle,
        SMALL_X_TOLERANCE,
        format!("negative moment ({source})"),
    ))
}

/// `k̃(0+) = q` for killed models.
pub fn q_positive_limit_check(
    spec: &SubordinatorSpec,
    density: &StepDensity,
) -> Result<ValidationReport> {
    let q = spec.kill();
    if !(q > 0.0) {
        return Err(Error::Domain("killed-limit check needs q > 0".into()));
    }
    let cells = lowest_decade(density.grid())?;
    let mut probes = Vec::with_capacity(cells.len());
    let mut samples = Vec::with_capacity(cells.len());
    for n in cells {
        let x = density.grid().midpoint(n);
        let k = density.heights()[n];
        probes.push(Probe {
            x,
            measured: k,
            oracle: q,
        });
        samples.push((x, k));
    }
    let limit = extrapolate_limit(&samples)?;
    Ok(ValidationReport::limit(
        "killed_limit",
        probes,
        limit,
        q,
        KILLED_LIMIT_TOLERANCE,
        "kill rate",
    ))
}

/// `x k_ψ(x) / Π̄(log x) → q* E[I^{-α}]` as `x → ∞`, where `k_ψ` is the
/// dual transform of `k̃`. Probes are the reflections `1/x̂` of the lowest decade.
pub fn dual_large_x_check(
    spec: &SubordinatorSpec,
    density: &StepDensity,
    seed: Option<&dyn FractionalMoments>,
) -> Result<ValidationReport> {
    let dual = dual_sn(spec)?;
    let q_star = dual.q_star();
    let (alpha, moment, source) = small_x_constant(spec, seed)?;
    let oracle = q_star * moment;
    let cells = lowest_decade(density.grid())?;
    let t = abscissa(alpha);
    let mut probes = Vec::with_capacity(cells.len());
    let mut samples = Vec::with_capacity(cells.len());
    for n in cells {
        let x_hat = density.grid().midpoint(n);
        let x = 1.0 / x_hat;
        // x k_ψ(x) = q* k̃(1/x)
        let ratio = q_star * density.heights()[n] / spec.tail(x.ln())?;
        probes.push(Probe {
            x,
            measured: ratio,
            oracle,
        });
        samples.push((t(x_hat), ratio));
    }
    let limit = extrapolate_limit(&samples)?;
    Ok(ValidationReport::limit(
        "dual_large_x",
        probes,
        limit,
        oracle,
        DUAL_TOLERANCE,
        format!("mean jump and negative moment ({source})"),
    ))
}
