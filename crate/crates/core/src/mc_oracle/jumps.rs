use crate::error::{Error, Result};
use crate::levy_model::{SubordinatorSpec, TailModel};
use crate::numerics::{bisect_monotone, QuadratureRequest};

/// Cutoffs at or above this leave too much of the jump measure to the compensator.
pub const MAX_CUTOFF: f64 = 0.1;
/// Expected jumps above the default cutoff over one path's horizon.
pub const TARGET_EVENTS: f64 = 500.0;
const TABLE_POINTS: usize = 4096;

/// Samples jump sizes from `Π` restricted to `(ε, ∞)`, normalised.
#[derive(Debug)]
pub(crate) struct JumpSampler<'a> {
    tail: &'a dyn TailModel,
    /// `Π̄(ε)`: the arrival rate of sampled jumps.
    pub rate: f64,
    closed_form: bool,
    /// `(ln Π̄(z), ln z)` with `Π̄` decreasing along the table.
    table: Vec<(f64, f64)>,
}

impl<'a> JumpSampler<'a> {
    pub fn new(tail: &'a dyn TailModel, cutoff: f64) -> Result<Self> {
        if tail.is_zero() {
            return Ok(Self {
                tail,
                rate: 0.0,
                closed_form: true,
                table: Vec::new(),
            });
        }
        let rate = if cutoff > 0.0 {
            tail.eval(cutoff)
        } else {
            tail.total_mass()
        };
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::Cutoff(format!(
                "tail {} has jump rate {rate} above cutoff {cutoff}",
                tail.name()
            )));
        }
        let closed_form = tail.inverse(0.5 * rate).is_some();
        let table = if closed_form {
            Vec::new()
        } else {
            inverse_table(tail, cutoff, rate)
        };
        Ok(Self {
            tail,
            rate,
            closed_form,
            table,
        })
    }

    /// Jump size for a uniform `u ∈ (0, 1)`: `Π̄⁻¹(u Π̄(ε))`.
    pub fn sample(&self, u: f64) -> f64 {
        let v = u * self.rate;
        if self.closed_form {
            return self.tail.inverse(v).unwrap_or(0.0);
        }
        let target = v.ln();
        let t = &self.table;
        // first entry with ln Π̄ below the target
        let i = t.partition_point(|&(lv, _)| lv >= target);
        if i == 0 {
            return t[0].1.exp();
        }
        let i = i.min(t.len() - 1);
        let (v0, z0) = t[i - 1];
        let (v1, z1) = t[i];
        let w = if v0 > v1 {
            (v0 - target) / (v0 - v1)
        } else {
            0.0
        };
        (z0 + w * (z1 - z0)).exp()
    }
}

fn inverse_table(tail: &dyn TailModel, cutoff: f64, rate: f64) -> Vec<(f64, f64)> {
    let lo = if cutoff > 0.0 { cutoff } else { 1e-12 };
    let mut hi = tail.probe_point().max(10.0 * lo);
    while hi < 1e8 && tail.eval(hi) > 1e-16 * rate {
        hi *= 2.0;
    }
    let step = (hi / lo).ln() / (TABLE_POINTS - 1) as f64;
    let mut table: Vec<(f64, f64)> = Vec::with_capacity(TABLE_POINTS);
    for j in 0..TABLE_POINTS {
        let lz = lo.ln() + j as f64 * step;
        let v = tail.eval(lz.exp());
        if !(v > 0.0) {
            break;
        }
        let lv = v.ln().min(rate.ln());
        // keep the table strictly decreasing in ln Π̄
        if let Some(&(prev, _)) = table.last() {
            if lv >= prev {
                continue;
            }
        }
        table.push((lv, lz));
    }
    table
}

/// `∫₀^ε x Π(dx) = ∫₀^ε (Π̄(x) - Π̄(ε)) dx`, the drift replacing jumps below `ε`.
pub(crate) fn compensation(tail: &dyn TailModel, cutoff: f64) -> Result<f64> {
    if cutoff == 0.0 || tail.is_zero() {
        return Ok(0.0);
    }
    let top = tail.eval(cutoff);
    let est = QuadratureRequest::new(|x| (tail.eval(x) - top).max(0.0), 0.0, cutoff)
        .tolerances(1e-10, 1e-300)
        .singularity(tail.singularity())
        .integrate()?;
    Ok(est.value)
}

/// Time scale of a path: the kill horizon `1/q`, or the time for `e^{-ζ}` to
/// fall by `e^{-27.6}` on average, whichever is shorter.
pub(crate) fn horizon(spec: &SubordinatorSpec) -> Result<f64> {
    let growth = spec.laplace_exponent(1.0)?;
    let fade = if growth > 0.0 {
        (1e12f64).ln() / growth
    } else {
        f64::INFINITY
    };
    let kill = if spec.kill() > 0.0 {
        1.0 / spec.kill()
    } else {
        f64::INFINITY
    };
    Ok(fade.min(kill))
}

/// Cutoff `ε` with about 500 expected jumps above it per path; zero for
/// finite-activity tails, which are simulated exactly.
pub fn default_cutoff(spec: &SubordinatorSpec) -> Result<f64> {
    let tail = spec.tail_model();
    if tail.is_zero() || tail.total_mass().is_finite() {
        return Ok(0.0);
    }
    let target = TARGET_EVENTS / horizon(spec)?;
    let eps = match tail.inverse(target) {
        Some(z) => z,
        None => bisect_monotone(
            |lz| tail.eval(lz.exp()),
            target,
            -200.0,
            tail.probe_point().ln(),
            1e-10,
        )?
        .exp(),
    };
    Ok(eps.min(1e-2))
}

/// Rejects cutoffs outside `[0, 0.1)`.
pub fn check_cutoff(cutoff: f64) -> Result<()> {
    if !(0.0..MAX_CUTOFF).contains(&cutoff) {
        return Err(Error::Cutoff(format!(
            "cutoff {cutoff} must lie in [0, {MAX_CUTOFF})"
        )));
    }
    Ok(())
}
