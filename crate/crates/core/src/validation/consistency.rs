use rayon::prelude::*;

use super::report::{Norm, Probe, ValidationReport};
use crate::density_solver::{build_grid, solve_with, SolverOptions, StepDensity};
use crate::error::{Error, Result};
use crate::levy_model::{rho_tilt, MomentSequence, SubordinatorSpec};
use crate::numerics::QuadratureRequest;
use crate::reference_laws::{Density, ReferenceLaw, RenewalDensity};

pub const REFERENCE_TOLERANCE: f64 = 1e-2;
pub const TILT_TOLERANCE: f64 = 2e-2;
pub const RENEWAL_TOLERANCE: f64 = 5e-3;
pub const RENEWAL_PROBES: usize = 32;

/// Cells to keep when the top 1% is excluded.
fn without_top_percent(cells: usize) -> usize {
    cells - cells.div_ceil(100)
}

/// Compares two densities on the intervals `cells`, probing each at its
/// geometric midpoint. `L1` weights the probes by interval length.
pub fn compare_density(
    check: &str,
    measured: &dyn Density,
    oracle: &dyn Density,
    cells: &[(f64, f64)],
    norm: Norm,
    threshold: f64,
    oracle_source: &str,
) -> Result<ValidationReport> {
    if cells.is_empty() {
        return Err(Error::Domain(format!("{check}: no cells to compare on")));
    }
    let probes: Vec<Probe> = cells
        .iter()
        .map(|&(lo, hi)| {
            let x = (lo * hi).sqrt();
            Ok(Probe {
                x,
                measured: measured.density(x)?,
                oracle: oracle.density(x)?,
            })
        })
        .collect::<Result<_>>()?;
    let value = match norm {
        Norm::Sup => probes
            .iter()
            .fold(0.0f64, |m, p| m.max((p.measured - p.oracle).abs())),
        Norm::L1 => probes
            .iter()
            .zip(cells)
            .map(|(p, (lo, hi))| (p.measured - p.oracle).abs() * (hi - lo))
            .sum(),
        other => {
            return Err(Error::Domain(format!(
                "norm {other} does not apply to densities"
            )));
        }
    };
    if !value.is_finite() {
        return Err(Error::Degenerate(format!(
            "{check}: {norm} distance is {value}"
        )));
    }
    Ok(ValidationReport::distance(
        check,
        norm,
        probes,
        value,
        threshold,
        oracle_source,
    ))
}

/// `k̃` against a closed-form law over the grid cells, leaving out the top
/// 1% when the law's support ends at `1/c`.
pub fn compare_to_reference(
    density: &StepDensity,
    law: &ReferenceLaw,
    norm: Norm,
) -> Result<ValidationReport> {
    if !law.has_density() {
        return Err(Error::Domain(format!(
            "{} has no density to compare with",
            law.name()
        )));
    }
    let grid = density.grid();
    let mut last = grid.cells() - density.zeroed_top_cells();
    if law.support().1.is_finite() {
        last = last.min(without_top_percent(grid.cells()));
    }
    let cells: Vec<(f64, f64)> = (0..last)
        .map(|n| (grid.node(n), grid.node(n + 1)))
        .collect();
    compare_density(
        &format!("reference_{norm}"),
        density,
        law,
        &cells,
        norm,
        REFERENCE_TOLERANCE,
        law.name(),
    )
}

/// Solver density, reweighted density and their distance for one tilt.
#[derive(Debug, Clone)]
pub struct TiltOutcome {
    pub report: ValidationReport,
    /// `k̃` of the tilted model, solved directly.
    pub direct: StepDensity,
    /// Normalised `x^ρ k̃(x)` from the base solve.
    pub reweighted: StepDensity,
}

/// Solve-then-tilt against tilt-then-solve, in `L1`.
///
/// Both solves use ratio `Δ` and `cells` on their own model's default grid.
pub fn tilt_consistency(
    spec: &SubordinatorSpec,
    rho: f64,
    ratio: f64,
    cells: usize,
    opts: &SolverOptions,
) -> Result<TiltOutcome> {
    let tilted = rho_tilt(spec, rho)?;
    let base_grid = build_grid(spec, ratio, cells, None)?;
    let base = solve_with(spec, &base_grid, opts)?;
    let heights: Vec<f64> = base
        .heights()
        .iter()
        .enumerate()
        .map(|(n, y)| y * base_grid.midpoint(n).powf(rho))
        .collect();
    let reweighted = StepDensity::from_heights(base_grid, heights, base.scheme())?;
    let direct_grid = build_grid(&tilted, ratio, cells, None)?;
    let direct = solve_with(&tilted, &direct_grid, opts)?;
    let distance = reweighted.l1_distance(&direct);

    let grid = direct.grid();
    let stride = (grid.cells() / 64).max(1);
    let probes = (0..grid.cells())
        .step_by(stride)
        .map(|n| {
            let x = grid.midpoint(n);
            Ok(Probe {
                x,
                measured: direct.heights()[n],
                oracle: reweighted.evaluate(x)?,
            })
        })
        .collect::<Result<_>>()?;
    let report = ValidationReport::distance(
        "tilt_consistency",
        Norm::L1,
        probes,
        distance,
        TILT_TOLERANCE,
        "reweighted base solve",
    );
    Ok(TiltOutcome {
        report,
        direct,
        reweighted,
    })
}

/// `∫ x^n k̃` against an independent moment sequence, by largest relative error.
pub fn moment_agreement(
    density: &StepDensity,
    oracle: &MomentSequence,
    threshold: f64,
) -> Result<ValidationReport> {
    let mut probes = Vec::new();
    let mut worst = 0.0f64;
    let mut source = String::from("moments");
    for entry in oracle.entries().iter().filter(|e| e.order > 0.0) {
        let measured = density.moment_of(entry.order)?;
        worst = worst.max((measured / entry.value - 1.0).abs());
        source = format!("moments ({})", entry.provenance);
        probes.push(Probe {
            x: entry.order,
            measured,
            oracle: entry.value,
        });
    }
    if probes.is_empty() {
        return Err(Error::Domain("no positive orders to compare".into()));
    }
    Ok(ValidationReport::distance(
        "moment_agreement",
        Norm::Relative,
        probes,
        worst,
        threshold,
        source,
    ))
}

/// `P(I > y) = ∫₀^∞ k̃(y e^x) u_q(x) dx` at `probes` grid nodes.
///
/// Probes sit on nodes, so every breakpoint of the step function in `x`
/// lands on a multiple of `L` and one table of `∫_{mL}^{(m+1)L} u_q` serves
/// all of them. With drift the top 1% of cells carries no probe.
pub fn renewal_check(
    density: &StepDensity,
    renewal: &RenewalDensity,
    probes: usize,
) -> Result<ValidationReport> {
    if probes < 2 {
        return Err(Error::Domain(
            "renewal check needs at least 2 probes".into(),
        ));
    }
    let grid = density.grid();
    let n_cells = grid.cells();
    let l = grid.log_step();
    let u_cells: Vec<f64> = (0..n_cells)
        .into_par_iter()
        .map(|m| {
            let lo = m as f64 * l;
            let mut req = QuadratureRequest::new(|x| renewal.eval(x).unwrap_or(0.0), lo, lo + l)
                .tolerances(1e-12, 1e-300);
            if m == 0 {
                req = req.singularity(renewal.singularity());
            }
            Ok(req.integrate()?.value)
        })
        .collect::<Result<_>>()?;
    let mut last = n_cells - density.zeroed_top_cells();
    if matches!(renewal, RenewalDensity::Drift { .. }) {
        last = last.min(without_top_percent(n_cells));
    }
    let count = probes.min(last);
    let y = density.heights();
    let rows: Vec<Probe> = (0..count)
        .map(|j| {
            let n = j * (last - 1) / (count - 1);
            let x = grid.node(n);
            let integral: f64 = y[n..].iter().zip(&u_cells).map(|(a, b)| a * b).sum();
            Ok(Probe {
                x,
                measured: density.survival(x)?,
                oracle: integral,
            })
        })
        .collect::<Result<_>>()?;
    let worst = rows
        .iter()
        .fold(0.0f64, |m, p| m.max((p.measured - p.oracle).abs()));
    Ok(ValidationReport::distance(
        "renewal_identity",
        Norm::Sup,
        rows,
        worst,
        RENEWAL_TOLERANCE,
        "renewal density integral",
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density_solver::solve;
    use crate::levy_model::positive_moments;
    use crate::levy_model::variants::{GammaExp, Zero};

    fn drift_spec(c: f64, q: f64) -> SubordinatorSpec {
        SubordinatorSpec::with_tail(c, q, Zero {}).unwrap()
    }

    fn solved(spec: &SubordinatorSpec, ratio: f64, cells: usize) -> StepDensity {
        solve(spec, &build_grid(spec, ratio, cells, None).unwrap()).unwrap()
    }

    #[test]
    fn uniform_against_its_closed_form() {
        let k = solved(&drift_spec(1.0, 1.0), 0.995, 1500);
        let law = ReferenceLaw::example1(1.0, 1.0).unwrap();
        let sup = compare_to_reference(&k, &law, Norm::Sup).unwrap();
        assert!(sup.passed, "{}", sup.summary_row());
        let l1 = compare_to_reference(&k, &law, Norm::L1).unwrap();
        assert!(l1.measured < sup.measured);
        assert_eq!(sup.probes.len(), 1500 - 15);
    }

    #[test]
    fn wrong_law_fails() {
        let k = solved(&drift_spec(1.0, 2.0), 0.995, 1500);
        let law = ReferenceLaw::example1(1.0, 1.0).unwrap();
        assert!(!compare_to_reference(&k, &law, Norm::Sup).unwrap().passed);
    }

    #[test]
    fn ratio_norm_is_rejected_for_densities() {
        let k = solved(&drift_spec(1.0, 1.0), 0.99, 300);
        let law = ReferenceLaw::example1(1.0, 1.0).unwrap();
        assert!(compare_to_reference(&k, &law, Norm::Ratio).is_err());
    }

    #[test]
    fn example1_tilt_both_ways() {
        let spec = drift_spec(1.0, 1.0);
        let out = tilt_consistency(&spec, 1.0, 0.995, 1500, &SolverOptions::default()).unwrap();
        assert!(out.report.passed, "{}", out.report.summary_row());
        let law = ReferenceLaw::example1_tilted(1.0, 1.0, 1.0).unwrap();
        let sup = compare_to_reference(&out.direct, &law, Norm::Sup).unwrap();
        assert!(sup.passed, "{}", sup.summary_row());
    }

    #[test]
    fn tiny_tilt_reproduces_base() {
        let spec =
            SubordinatorSpec::with_tail(0.0, 0.0, GammaExp::new(1.0, 1.5, 2.0).unwrap()).unwrap();
        let out = tilt_consistency(&spec, 1e-6, 0.995, 1500, &SolverOptions::default()).unwrap();
        let base = solved(&spec, 0.995, 1500);
        assert!(out.direct.l1_distance(&base) < 1e-2);
        assert!(out.report.passed);
    }

    #[test]
    fn moments_of_uniform() {
        let spec = drift_spec(1.0, 1.0);
        let k = solved(&spec, 0.995, 1500);
        let r = moment_agreement(&k, &positive_moments(&spec, 5).unwrap(), 5e-3).unwrap();
        assert_eq!(r.probes.len(), 5);
        assert!(r.passed, "{}", r.summary_row());
    }

    #[test]
    fn renewal_identity_for_uniform_and_example3() {
        let k = solved(&drift_spec(1.0, 1.0), 0.995, 1500);
        let r = renewal_check(
            &k,
            &RenewalDensity::Drift { c: 1.0, q: 1.0 },
            RENEWAL_PROBES,
        )
        .unwrap();
        assert_eq!(r.probes.len(), RENEWAL_PROBES);
        assert!(r.passed, "{}", r.summary_row());

        let law = ReferenceLaw::example3_beta1(0.5).unwrap();
        let spec = law.model().unwrap();
        let k = solved(&spec, 0.995, 1500);
        let r = renewal_check(
            &k,
            &RenewalDensity::Lamperti { a: 0.5, beta: 1.0 },
            RENEWAL_PROBES,
        )
        .unwrap();
        assert!(r.passed, "{}", r.summary_row());
    }

    #[test]
    fn renewal_mismatch_is_detected() {
        let k = solved(&drift_spec(1.0, 1.0), 0.995, 1500);
        let r = renewal_check(&k, &RenewalDensity::Drift { c: 1.0, q: 3.0 }, 16).unwrap();
        assert!(!r.passed);
        assert!(renewal_check(&k, &RenewalDensity::Drift { c: 1.0, q: 1.0 }, 1).is_err());
    }
}
