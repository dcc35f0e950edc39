use rayon::prelude::*;
use serde::Serialize;

use super::step::StepDensity;
use super::weights::window_integral;
use crate::error::{Error, Result};
use crate::levy_model::SubordinatorSpec;

pub const DEFAULT_PROBES: usize = 64;

#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    /// `(x_n, |(1 - c x_n) k̃(x_n) - RHS(x_n)|)` per probe node.
    pub probes: Vec<(f64, f64)>,
    pub max: f64,
    pub argmax: f64,
}

/// Residual of the integral equation at 64 grid nodes.
pub fn residual(spec: &SubordinatorSpec, density: &StepDensity) -> Result<ResidualReport> {
    residual_with(spec, density, DEFAULT_PROBES)
}

/// Residual at `probes` nodes spread evenly over the grid.
///
/// The right-hand side is integrated afresh against the step function: on
/// each cell `[x_i, x_{i+1})`, `∫ Π̄(log(y/x_n)) dy = x_n ∫ Π̄(u) e^u du` over
/// `u ∈ [(i-n)L, (i-n+1)L)`. With positive drift the top 1% of cells, where
/// the density may blow up, is left out.
pub fn residual_with(
    spec: &SubordinatorSpec,
    density: &StepDensity,
    probes: usize,
) -> Result<ResidualReport> {
    if probes == 0 {
        return Err(Error::Domain("at least one probe is needed".into()));
    }
    let grid = density.grid();
    let n_cells = grid.cells();
    let l = grid.log_step();
    let tail = spec.tail_model();
    let cell_integrals: Vec<f64> = if tail.is_zero() {
        vec![0.0; n_cells]
    } else {
        (0..n_cells)
            .into_par_iter()
            .map(|m| window_integral(tail.as_ref(), m as f64 * l, (m + 1) as f64 * l))
            .collect::<Result<_>>()?
    };
    let mut last = n_cells - density.zeroed_top_cells();
    if spec.drift() > 0.0 {
        last = last.min(n_cells - n_cells.div_ceil(100));
    }
    let count = probes.min(last);
    let y = density.heights();
    let rows: Vec<(f64, f64)> = (0..count)
        .into_par_iter()
        .map(|j| {
            let n = if count == 1 {
                0
            } else {
                j * (last - 1) / (count - 1)
            };
            let x = grid.node(n);
            let kernel: f64 = y[n..].iter().zip(&cell_integrals).map(|(a, b)| a * b).sum();
            let rhs = x * kernel + spec.kill() * density.survival(x)?;
            Ok((x, ((1.0 - spec.drift() * x) * y[n] - rhs).abs()))
        })
        .collect::<Result<_>>()?;
    let (argmax, max) =
        rows.iter()
            .copied()
            .fold((f64::NAN, 0.0), |acc, r| if r.1 >= acc.1 { r } else { acc });
    Ok(ResidualReport {
        probes: rows,
        max,
        argmax,
    })
}
