use super::simulate::{simulate, Direction, SampleSet, SimulationOptions};
use crate::density_solver::StepDensity;
use crate::error::{Error, Result};
use crate::levy_model::SubordinatorSpec;
use crate::numerics::{extrapolate_limit, Limit};
use crate::validation::{Norm, Probe, ValidationReport};

/// `c(0.05)` of the asymptotic Kolmogorov distribution.
pub const KS_CRITICAL: f64 = 1.36;
const KS_REPORT_ROWS: usize = 64;

/// Sup distance between the empirical CDF and `cdf`; passes when it is at
/// most `1.36/√M + slack`.
pub fn ks_distance(
    samples: &SampleSet,
    cdf: &dyn Fn(f64) -> Result<f64>,
    slack: f64,
    oracle_source: &str,
) -> Result<ValidationReport> {
    let m = samples.len();
    if m < 100 {
        return Err(Error::Domain(format!(
            "KS distance needs at least 100 samples, got {m}"
        )));
    }
    let sorted = samples.sorted();
    let mf = m as f64;
    let mut stat = 0.0f64;
    let mut probes = Vec::with_capacity(KS_REPORT_ROWS);
    let stride = (m / KS_REPORT_ROWS).max(1);
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x)?;
        let above = (i + 1) as f64 / mf - f;
        let below = f - i as f64 / mf;
        stat = stat.max(above).max(below);
        if i % stride == stride / 2 {
            probes.push(Probe {
                x,
                measured: (i + 1) as f64 / mf,
                oracle: f,
            });
        }
    }
    let band = KS_CRITICAL / mf.sqrt() + slack;
    Ok(ValidationReport::distance(
        "ks_distance",
        Norm::Ks,
        probes,
        stat,
        band,
        oracle_source,
    ))
}

/// Largest mass carried by a single cell: the resolution of the step CDF.
pub fn cell_mass_bound(density: &StepDensity) -> f64 {
    let grid = density.grid();
    density
        .heights()
        .iter()
        .enumerate()
        .map(|(n, y)| y * (grid.node(n + 1) - grid.node(n)))
        .fold(0.0, f64::max)
}

/// [`ks_distance`] against the solver CDF, with the cell-mass slack.
pub fn ks_against_density(samples: &SampleSet, density: &StepDensity) -> Result<ValidationReport> {
    ks_distance(
        samples,
        &|x| density.cdf(x),
        cell_mass_bound(density),
        "solver density",
    )
}

/// Shape and limit reports from [`monotone_histogram_check`].
#[derive(Debug, Clone)]
pub struct MonotoneHistogram {
    pub shape: ValidationReport,
    pub limit: ValidationReport,
    /// `(bin centre, height, standard error)`.
    pub bins: Vec<(f64, f64, f64)>,
}

impl MonotoneHistogram {
    pub fn passed(&self) -> bool {
        self.shape.passed && self.limit.passed
    }
}

const BINS: usize = 24;
const BAND: f64 = 3.0;

/// Simulates `I = ∫₀^{e_q} e^{ζ_s} ds` and checks that its histogram on a
/// log grid is nonincreasing and convex within 3 standard errors, and that
/// `F̂(x)/x` extrapolates to `q` as `x ↓ 0`.
pub fn monotone_histogram_check(
    spec: &SubordinatorSpec,
    opts: &SimulationOptions,
) -> Result<MonotoneHistogram> {
    if !(spec.kill() > 0.0) {
        return Err(Error::Domain("monotone histogram check needs q > 0".into()));
    }
    let opts = opts.clone().direction(Direction::Increasing);
    let samples = simulate(spec, &opts)?;
    let sorted = samples.sorted();
    let m = sorted.len() as f64;
    let quantile = |p: f64| sorted[((p * m) as usize).min(sorted.len() - 1)];

    let lo = quantile(0.005);
    let hi = quantile(0.95);
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Degenerate(format!(
            "sample quantiles {lo}, {hi} give no bins"
        )));
    }
    let edges: Vec<f64> = (0..=BINS)
        .map(|j| lo * (hi / lo).powf(j as f64 / BINS as f64))
        .collect();
    let count_below = |x: f64| sorted.partition_point(|&v| v < x) as f64;
    let bins: Vec<(f64, f64, f64)> = edges
        .windows(2)
        .map(|w| {
            let n = count_below(w[1]) - count_below(w[0]);
            let width = w[1] - w[0];
            let p = n / m;
            (
                (w[0] * w[1]).sqrt(),
                p / width,
                (p * (1.0 - p) / m).sqrt() / width,
            )
        })
        .collect();

    let mut violations = 0usize;
    let mut probes = Vec::with_capacity(BINS);
    for i in 0..bins.len() {
        let (x, h, se) = bins[i];
        // nonincreasing: h_i ≤ h_{i-1}
        let mut bound = f64::INFINITY;
        if i > 0 {
            let (_, prev, prev_se) = bins[i - 1];
            let allowed = prev + BAND * (se * se + prev_se * prev_se).sqrt();
            if h > allowed {
                violations += 1;
            }
            bound = prev;
        }
        // convex: h_i below the chord through its neighbours
        if i > 0 && i + 1 < bins.len() {
            let (x0, h0, s0) = bins[i - 1];
            let (x2, h2, s2) = bins[i + 1];
            let w = (x - x0) / (x2 - x0);
            let chord = (1.0 - w) * h0 + w * h2;
            let noise = (se * se + (1.0 - w).powi(2) * s0 * s0 + w * w * s2 * s2).sqrt();
            if h > chord + BAND * noise {
                violations += 1;
            }
        }
        probes.push(Probe {
            x,
            measured: h,
            oracle: bound,
        });
    }
    let shape = ValidationReport::distance(
        "monotone_histogram",
        Norm::Shape,
        probes,
        violations as f64,
        0.0,
        "shape of a completely monotone density",
    );

    // F̂(x)/x over the lowest sample decile, extrapolated to x = 0
    let points: Vec<f64> = (0..10)
        .map(|j| quantile(0.1 * (0.1f64).powf(j as f64 / 9.0)))
        .collect();
    let mut samples_fx = Vec::with_capacity(points.len());
    let mut limit_probes = Vec::with_capacity(points.len());
    for &x in &points {
        let f = count_below(x) / m;
        samples_fx.push((x, f / x));
        limit_probes.push(Probe {
            x,
            measured: f / x,
            oracle: spec.kill(),
        });
    }
    samples_fx.dedup_by(|a, b| a.0 >= b.0);
    let fit = extrapolate_limit(&samples_fx)?;
    let x_min = points[points.len() - 1];
    let f_min = count_below(x_min) / m;
    let sampling = (f_min * (1.0 - f_min) / m).sqrt() / x_min;
    let limit = ValidationReport::limit(
        "histogram_limit",
        limit_probes,
        Limit {
            value: fit.value,
            uncertainty: fit.uncertainty + BAND * sampling,
        },
        spec.kill(),
        0.0,
        "kill rate",
    );
    Ok(MonotoneHistogram { shape, limit, bins })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_model::variants::{CompoundPoissonExp, Zero};
    use crate::reference_laws::ReferenceLaw;

    fn uniform() -> SubordinatorSpec {
        SubordinatorSpec::with_tail(1.0, 1.0, Zero {}).unwrap()
    }

    #[test]
    fn uniform_samples_pass_and_wrong_law_fails() {
        let s = simulate(&uniform(), &SimulationOptions::new(20_000, 7)).unwrap();
        let law = ReferenceLaw::example1(1.0, 1.0).unwrap();
        let ok = ks_distance(&s, &|x| law.cdf(x), 0.0, "uniform").unwrap();
        assert!(ok.passed, "{}", ok.summary_row());
        let gamma = ReferenceLaw::example2(1.0, 1.5, 2.0).unwrap();
        let bad = ks_distance(&s, &|x| gamma.cdf(x), 0.0, "gamma").unwrap();
        assert!(!bad.passed);
    }

    #[test]
    fn too_few_samples() {
        let s = simulate(&uniform(), &SimulationOptions::new(50, 7)).unwrap();
        assert!(ks_distance(&s, &|x| Ok(x), 0.0, "uniform").is_err());
    }

    #[test]
    fn drift_histogram_is_monotone_with_limit_q() {
        let r = monotone_histogram_check(&uniform(), &SimulationOptions::new(40_000, 3)).unwrap();
        assert!(
            r.passed(),
            "{}\n{}",
            r.shape.summary_row(),
            r.limit.summary_row()
        );
        // density (1 + x)^{-2}
        for &(x, h, se) in &r.bins {
            assert!(
                (h - (1.0 + x).powi(-2)).abs() < 5.0 * se + 0.02,
                "{x} {h} {se}"
            );
        }
    }

    #[test]
    fn compound_poisson_histogram_is_monotone() {
        let spec =
            SubordinatorSpec::with_tail(0.0, 1.0, CompoundPoissonExp::new(1.0, 2.0).unwrap())
                .unwrap();
        let r = monotone_histogram_check(&spec, &SimulationOptions::new(40_000, 4)).unwrap();
        assert!(
            r.passed(),
            "{}\n{}",
            r.shape.summary_row(),
            r.limit.summary_row()
        );
    }
}
