use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::simulate::PathModel;
use crate::error::{Error, Result};
use crate::levy_model::SubordinatorSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityEstimate {
    pub t: f64,
    pub value: f64,
    pub std_error: f64,
}

/// `h(t) = q E[e^{-ξ_{τ(t)}}; τ(t) < e_q]` at each probe, where
/// `τ(t) = inf{u : ∫₀^u e^{ξ_s} ds > t}` and `ξ = -ζ`.
///
/// Needs a killed compound-Poisson-plus-drift model: between jumps the clock
/// has a closed form and is inverted exactly.
pub fn lamperti_density_estimate(
    spec: &SubordinatorSpec,
    probes: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<DensityEstimate>> {
    let q = spec.kill();
    if !(q > 0.0) {
        return Err(Error::Domain("the Lamperti estimator needs q > 0".into()));
    }
    let tail = spec.tail_model();
    if !tail.is_zero() && !tail.total_mass().is_finite() {
        return Err(Error::Domain(format!(
            "tail {} has infinitely many jumps; the clock cannot be inverted exactly",
            tail.name()
        )));
    }
    if samples < 2 {
        return Err(Error::Domain("need at least two paths".into()));
    }
    if probes.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::Domain("probe times must be positive".into()));
    }
    let mut order: Vec<usize> = (0..probes.len()).collect();
    order.sort_by(|&i, &j| probes[i].total_cmp(&probes[j]));
    let sorted: Vec<f64> = order.iter().map(|&i| probes[i]).collect();

    let model = PathModel::new(spec, 0.0)?;
    let rows: Vec<Vec<f64>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = PathModel::rng(seed, i);
            crossings(&model, &sorted, &mut rng)
        })
        .collect();

    let m = samples as f64;
    let mut out = vec![
        DensityEstimate {
            t: 0.0,
            value: 0.0,
            std_error: 0.0
        };
        probes.len()
    ];
    for (k, &slot) in order.iter().enumerate() {
        let (s, s2) = rows
            .iter()
            .fold((0.0, 0.0), |(a, b), r| (a + r[k], b + r[k] * r[k]));
        let mean = s / m;
        let var = (s2 / m - mean * mean).max(0.0) * m / (m - 1.0);
        out[slot] = DensityEstimate {
            t: sorted[k],
            value: q * mean,
            std_error: q * (var / m).sqrt(),
        };
    }
    Ok(out)
}

/// `e^{-ξ_{τ(t)}}` for each sorted probe `t` on one path, zero when the
/// path is killed first.
fn crossings(model: &PathModel, probes: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut out = vec![0.0; probes.len()];
    let mut next = 0;
    let mut left = model.kill_time(rng);
    let mut z = 0.0f64;
    let mut clock = 0.0;
    while next < probes.len() {
        let gap = model.next_gap(rng);
        let dt = gap.min(left);
        let scale = (-z).exp();
        let reach = clock + scale * model.decay_integral(dt);
        while next < probes.len() && probes[next] < reach {
            // solve clock + e^{-z} ∫₀^s e^{-c s'} ds' = t for s
            let need = (probes[next] - clock) / scale;
            let s = if model.drift > 0.0 {
                -(-model.drift * need).ln_1p() / model.drift
            } else {
                need
            };
            out[next] = (z + model.drift * s).exp();
            next += 1;
        }
        if dt.is_infinite() || gap >= left {
            break;
        }
        clock = reach;
        z += model.drift * dt + model.jump(rng);
        left -= gap;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_model::variants::{Stable, Zero};

    #[test]
    fn uniform_density_is_one() {
        let spec = SubordinatorSpec::with_tail(1.0, 1.0, Zero {}).unwrap();
        let est = lamperti_density_estimate(&spec, &[0.5, 0.1, 0.9], 20_000, 1).unwrap();
        for e in &est {
            assert!((e.value - 1.0).abs() < 3.0 * e.std_error + 1e-12, "{e:?}");
        }
        assert_eq!(est[1].t, 0.1);
    }

    #[test]
    fn killed_drift_matches_linear_density() {
        let spec = SubordinatorSpec::with_tail(1.0, 2.0, Zero {}).unwrap();
        let est = lamperti_density_estimate(&spec, &[0.25, 1.5], 20_000, 2).unwrap();
        assert!(
            (est[0].value - 1.5).abs() < 3.0 * est[0].std_error,
            "{:?}",
            est[0]
        );
        assert_eq!(est[1].value, 0.0);
    }

    #[test]
    fn infinite_activity_is_refused() {
        let spec = SubordinatorSpec::with_tail(1.0, 1.0, Stable::new(0.5).unwrap()).unwrap();
        assert!(lamperti_density_estimate(&spec, &[0.5], 100, 1).is_err());
        let unkilled = SubordinatorSpec::with_tail(1.0, 0.0, Zero {}).unwrap();
        assert!(lamperti_density_estimate(&unkilled, &[0.5], 100, 1).is_err());
    }
}
