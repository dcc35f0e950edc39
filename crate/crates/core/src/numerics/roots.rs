use crate::error::{Error, Result};

/// Finds `x ∈ [lo, hi]` with `f(x) = target` for a monotone `f`, by bisection.
///
/// Works for either direction of monotonicity; the bracket must contain the target.
pub fn bisect_monotone(
    f: impl Fn(f64) -> f64,
    target: f64,
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
) -> Result<f64> {
    let f_lo = f(lo) - target;
    let f_hi = f(hi) - target;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Domain(format!(
            "target {target:e} is not bracketed by [{lo:e}, {hi:e}]"
        )));
    }
    let increasing = f_hi > f_lo;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo) <= rel_tol * mid.abs().max(f64::MIN_POSITIVE) || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let above = f(mid) > target;
        if above == increasing {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Doubles `start` until `pred` holds, up to `limit`.
pub fn expand_upper(start: f64, limit: f64, pred: impl Fn(f64) -> bool) -> Option<f64> {
    let mut x = start;
    while x <= limit {
        if pred(x) {
            return Some(x);
        }
        x *= 2.0;
    }
    None
}
