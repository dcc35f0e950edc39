use std::sync::Arc;

use super::grid::GeometricGrid;
use super::scheme::{CollocationScheme, Midpoint, SchemeRegistry};
use super::step::StepDensity;
use super::weights::{kernel_weights, KernelWeights};
use crate::error::{Error, Result};
use crate::levy_model::SubordinatorSpec;

/// Cells near `x_max` without a positive solution may be zeroed, up to this fraction.
const MAX_ZEROED_FRACTION: f64 = 0.01;
const RESCALE_ABOVE: f64 = 1e200;

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub scheme: Arc<dyn CollocationScheme>,
    /// Provisional height of the top cell; the output does not depend on it.
    pub seed_height: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            scheme: Arc::new(Midpoint),
            seed_height: 1.0,
        }
    }
}

impl SolverOptions {
    pub fn with_scheme(name: &str) -> Result<Self> {
        Ok(Self {
            scheme: SchemeRegistry::global().get(name)?,
            ..Self::default()
        })
    }
}

/// Solves with the default (midpoint) scheme.
pub fn solve(spec: &SubordinatorSpec, grid: &GeometricGrid) -> Result<StepDensity> {
    solve_with(spec, grid, &SolverOptions::default())
}

pub fn solve_with(
    spec: &SubordinatorSpec,
    grid: &GeometricGrid,
    opts: &SolverOptions,
) -> Result<StepDensity> {
    let weights = kernel_weights(spec, grid, opts.scheme.as_ref())?;
    solve_with_weights(spec, grid, &weights, opts)
}

/// Back-substitution with precomputed weights.
///
/// At the collocation point `x̂_n` of cell `n` the discrete equation reads
/// `(1 - c x̂_n) y_n = x̂_n Σ_{i≥n} y_i W_{i-n} + q (y_n (x_{n+1} - x̂_n) + Σ_{i>n} y_i |cell i|)`;
/// the `y_n` terms move to the left, leaving the denominator
/// `D_n = 1 - c x̂_n - x̂_n W_0 - q (x_{n+1} - x̂_n)`.
pub fn solve_with_weights(
    spec: &SubordinatorSpec,
    grid: &GeometricGrid,
    weights: &KernelWeights,
    opts: &SolverOptions,
) -> Result<StepDensity> {
    if spec.tail_model().is_zero() && spec.kill() == 0.0 {
        return Err(Error::Degenerate(format!(
            "pure drift without killing: I = 1/c = {} is deterministic",
            1.0 / spec.drift()
        )));
    }
    let scheme = opts.scheme.as_ref();
    if weights.scheme() != scheme.name() || weights.len() != grid.cells() {
        return Err(Error::Domain(format!(
            "weights were built for `{}` with {} cells, solving `{}` with {} cells",
            weights.scheme(),
            weights.len(),
            scheme.name(),
            grid.cells()
        )));
    }
    if !(opts.seed_height > 0.0 && opts.seed_height.is_finite()) {
        return Err(Error::Domain(format!(
            "seed height {} must be positive",
            opts.seed_height
        )));
    }

    let n_cells = grid.cells();
    let (c, q) = (spec.drift(), spec.kill());
    let w = weights.values();
    let nodes = grid.nodes();
    let widths: Vec<f64> = nodes.windows(2).map(|p| p[1] - p[0]).collect();
    let points: Vec<f64> = (0..n_cells)
        .map(|n| scheme.collocation_point(grid, n))
        .collect();
    let denominators: Vec<f64> = (0..n_cells)
        .map(|n| {
            let x = points[n];
            1.0 - c * x - x * w[0] - q * (nodes[n + 1] - x)
        })
        .collect();

    // D_n decreases towards x_max, so a failing block sits at the top.
    let mut top = n_cells;
    while top > 0 && denominators[top - 1] <= 0.0 {
        top -= 1;
    }
    let zeroed = n_cells - top;
    if top == 0 || zeroed as f64 > MAX_ZEROED_FRACTION * n_cells as f64 {
        let n = top.min(n_cells - 1);
        return Err(Error::Denominator {
            n,
            value: denominators[n],
        });
    }
    if let Some(n) = denominators[..top].iter().position(|&d| d <= 0.0) {
        return Err(Error::Denominator {
            n,
            value: denominators[n],
        });
    }

    let mut y = vec![0.0; n_cells];
    y[top - 1] = opts.seed_height;
    let mut upper = opts.seed_height * widths[top - 1];
    for n in (0..top - 1).rev() {
        let kernel: f64 = y[n + 1..top]
            .iter()
            .zip(&w[1..top - n])
            .map(|(a, b)| a * b)
            .sum();
        y[n] = (points[n] * kernel + q * upper) / denominators[n];
        upper += y[n] * widths[n];
        if y[n] > RESCALE_ABOVE {
            y[n..top].iter_mut().for_each(|v| *v /= RESCALE_ABOVE);
            upper /= RESCALE_ABOVE;
        }
    }
    Ok(StepDensity::from_heights(grid.clone(), y, scheme.name())?.with_zeroed_top_cells(zeroed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density_solver::build_grid;
    use crate::density_solver::scheme::LeftNode;
    use crate::levy_model::variants::{GammaExp, Stable};
    use approx::assert_relative_eq;

    #[test]
    fn uniform_law() {
        let s = SubordinatorSpec::drift_only(1.0, 1.0).unwrap();
        let g = build_grid(&s, 0.999, 4000, None).unwrap();
        let d = solve(&s, &g).unwrap();
        let keep = g.cells() - g.cells() / 100;
        let err = d.heights()[..keep]
            .iter()
            .map(|y| (y - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-2, "{err}");
        assert_relative_eq!(d.survival(0.25).unwrap(), 0.75, epsilon = 1e-2);
        assert_relative_eq!(d.moment_of(0.0).unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn linear_law_from_double_kill() {
        let s = SubordinatorSpec::drift_only(1.0, 2.0).unwrap();
        let g = build_grid(&s, 0.999, 4000, None).unwrap();
        let d = solve(&s, &g).unwrap();
        for n in (0..3900).step_by(97) {
            let x = g.midpoint(n);
            assert!((d.heights()[n] - 2.0 * (1.0 - x)).abs() < 1e-2);
        }
    }

    #[test]
    fn left_node_recurrence_is_the_textbook_formula() {
        let s =
            SubordinatorSpec::with_tail(0.5, 0.3, GammaExp::new(1.0, 1.5, 0.1).unwrap()).unwrap();
        let g = build_grid(&s, 0.99, 120, None).unwrap();
        let opts = SolverOptions {
            scheme: Arc::new(LeftNode),
            seed_height: 1.0,
        };
        let w = kernel_weights(&s, &g, &LeftNode).unwrap();
        let d = solve_with_weights(&s, &g, &w, &opts).unwrap();
        let y = d.heights();
        let x = g.nodes();
        for n in 0..g.cells() - d.zeroed_top_cells() - 1 {
            let lhs = (1.0 - 0.5 * x[n]) * y[n];
            let rhs: f64 = (n..g.cells())
                .map(|i| x[n] * y[i] * w.values()[i - n] + 0.3 * y[i] * (x[i + 1] - x[i]))
                .sum();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
        }
    }

    #[test]
    fn seed_height_does_not_matter() {
        let s =
            SubordinatorSpec::with_tail(0.0, 0.0, GammaExp::new(0.5, 1.0, 1.0).unwrap()).unwrap();
        let g = build_grid(&s, 0.99, 800, None).unwrap();
        let a = solve(&s, &g).unwrap();
        let b = solve_with(
            &s,
            &g,
            &SolverOptions {
                seed_height: 7.0,
                ..SolverOptions::default()
            },
        )
        .unwrap();
        for (u, v) in a.heights().iter().zip(b.heights()) {
            assert!((u - v).abs() <= 1e-12 * u.abs().max(1e-300));
        }
    }

    #[test]
    fn stable_with_drift_zeroes_a_thin_top_block() {
        let s = SubordinatorSpec::with_tail(1.0, 0.0, Stable::new(0.25).unwrap()).unwrap();
        let g = build_grid(&s, 0.998, 4500, None).unwrap();
        let d = solve(&s, &g).unwrap();
        assert!(d.zeroed_top_cells() > 0 && d.zeroed_top_cells() <= 45);
        assert!(d.heights().iter().all(|&y| y >= 0.0));
        // a coarse grid would need too many zeroed cells
        let coarse = build_grid(&s, 0.9, 50, None).unwrap();
        assert!(matches!(solve(&s, &coarse), Err(Error::Denominator { .. })));
    }

    #[test]
    fn deterministic_functional_is_rejected() {
        let s = SubordinatorSpec::drift_only(1.0, 0.0).unwrap();
        let g = build_grid(&s, 0.99, 100, None).unwrap();
        assert!(matches!(solve(&s, &g), Err(Error::Degenerate(_))));
    }

    #[test]
    fn mismatched_weights_are_rejected() {
        let s = SubordinatorSpec::drift_only(1.0, 1.0).unwrap();
        let g = build_grid(&s, 0.99, 100, None).unwrap();
        let w = kernel_weights(&s, &g, &LeftNode).unwrap();
        assert!(solve_with_weights(&s, &g, &w, &SolverOptions::default()).is_err());
    }
}
