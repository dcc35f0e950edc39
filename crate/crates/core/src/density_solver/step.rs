use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::grid::GeometricGrid;
use crate::error::{Error, Result};
use crate::levy_model::FractionalMoments;

/// Piecewise-constant density: height `y_n` on cell `[x_n, x_{n+1})`,
/// zero outside `[x_0, x_max)`, normalised to unit mass.
#[derive(Debug, Clone, Serialize)]
pub struct StepDensity {
    grid: GeometricGrid,
    heights: Vec<f64>,
    scheme: String,
    left_gap_mass_bound: f64,
    left_exponent: f64,
    zeroed_top_cells: usize,
    #[serde(skip)]
    upper_mass: Vec<f64>,
}

impl StepDensity {
    /// Normalises `heights` so that the step function plus its power-law
    /// continuation below `x_0` has unit mass.
    pub fn from_heights(grid: GeometricGrid, mut heights: Vec<f64>, scheme: &str) -> Result<Self> {
        if heights.len() != grid.cells() {
            return Err(Error::Domain(format!(
                "{} heights for {} cells",
                heights.len(),
                grid.cells()
            )));
        }
        let nodes = grid.nodes();
        let step_mass: f64 = heights
            .iter()
            .enumerate()
            .map(|(n, y)| y * (nodes[n + 1] - nodes[n]))
            .sum();
        let left_exponent = left_exponent(&nodes, &heights);
        let gap = heights[0] * nodes[0] / (1.0 + left_exponent);
        let mass = step_mass + gap;
        if !(step_mass > 0.0 && mass.is_finite()) {
            return Err(Error::Degenerate(format!(
                "step function has mass {step_mass}"
            )));
        }
        for (n, y) in heights.iter_mut().enumerate() {
            *y /= mass;
            if !y.is_finite() || *y < 0.0 {
                return Err(Error::NonPositive { n, value: *y });
            }
        }
        let mut upper_mass = vec![0.0; heights.len() + 1];
        for n in (0..heights.len()).rev() {
            upper_mass[n] = upper_mass[n + 1] + heights[n] * (nodes[n + 1] - nodes[n]);
        }
        Ok(Self {
            grid,
            heights,
            scheme: scheme.to_string(),
            left_gap_mass_bound: gap / mass,
            left_exponent,
            zeroed_top_cells: 0,
            upper_mass,
        })
    }

    pub(crate) fn with_zeroed_top_cells(mut self, count: usize) -> Self {
        self.zeroed_top_cells = count;
        self
    }

    pub fn grid(&self) -> &GeometricGrid {
        &self.grid
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn scheme(&self) -> &str {
        &self.scheme
    }

    /// Mass assigned below `x_0` by the continuation `y_0 (x/x_0)^γ`.
    pub fn left_gap_mass_bound(&self) -> f64 {
        self.left_gap_mass_bound
    }

    /// Exponent `γ` of the continuation below `x_0`, fitted on the first 5% of cells.
    pub fn left_exponent(&self) -> f64 {
        self.left_exponent
    }

    /// Bound on the mass above `x_max` (from the grid truncation).
    pub fn upper_tail_bound(&self) -> f64 {
        self.grid.upper_tail_bound()
    }

    /// Cells next to `x_max` that were set to zero because the discrete
    /// equation has no positive solution there.
    pub fn zeroed_top_cells(&self) -> usize {
        self.zeroed_top_cells
    }

    /// Mass of the step function on `[x_0, x_max)`; `1 - left_gap_mass_bound()`.
    pub fn covered_mass(&self) -> f64 {
        self.upper_mass[0]
    }

    /// `k̃(x)`; zero outside the grid.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) || x.is_nan() {
            return Err(Error::Domain(format!(
                "density evaluated at {x}; need x > 0"
            )));
        }
        Ok(self.grid.cell_of(x).map_or(0.0, |n| self.heights[n]))
    }

    /// `∫_x^∞ k̃`, exact for the step function and its continuation below `x_0`.
    pub fn survival(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::Domain(format!(
                "survival evaluated at {x}; need x >= 0"
            )));
        }
        let x0 = self.grid.node(0);
        Ok(match self.grid.cell_of(x) {
            Some(n) => self.upper_mass[n + 1] + self.heights[n] * (self.grid.node(n + 1) - x),
            None if x < x0 => {
                let below = (x / x0).powf(1.0 + self.left_exponent);
                self.upper_mass[0] + self.left_gap_mass_bound * (1.0 - below)
            }
            None => 0.0,
        })
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        Ok(1.0 - self.survival(x)?)
    }

    /// `∫ x^r k̃(x) dx`, cell by cell with the exact antiderivative, plus the
    /// continuation below `x_0`.
    ///
    /// Fails when `r + 1 + γ ≤ 0`, where the continuation is not integrable.
    pub fn moment_of(&self, r: f64) -> Result<f64> {
        let p = r + 1.0;
        if !r.is_finite() || (self.left_gap_mass_bound > 0.0 && p + self.left_exponent <= 0.0) {
            return Err(Error::Domain(format!(
                "moment of order {r} diverges at 0 (density ~ x^{:.3} there)",
                self.left_exponent
            )));
        }
        let l = self.grid.log_step();
        // ∫_{x_n}^{x_n e^L} x^r dx = x_n^{r+1} (e^{(r+1)L} - 1)/(r+1)
        let factor = if p == 0.0 { l } else { (p * l).exp_m1() / p };
        let cells: f64 = self
            .heights
            .iter()
            .enumerate()
            .filter(|(_, &y)| y != 0.0)
            .map(|(n, &y)| y * self.grid.node(n).powf(p) * factor)
            .sum();
        let x0 = self.grid.node(0);
        let gap = self.heights[0] * x0.powf(p) / (p + self.left_exponent);
        Ok(cells
            + if self.left_gap_mass_bound > 0.0 {
                gap
            } else {
                0.0
            })
    }

    /// Abscissae used when the density is exported: geometric cell midpoints.
    pub fn representative_points(&self) -> Vec<f64> {
        (0..self.grid.cells())
            .map(|n| self.grid.midpoint(n))
            .collect()
    }

    /// `x,k` rows, one per cell at its geometric midpoint, 12 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,k")?;
        for (x, y) in self.representative_points().iter().zip(&self.heights) {
            writeln!(out, "{x:.11e},{y:.11e}")?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_csv(&mut out)?;
        out.flush()?;
        Ok(())
    }

    fn height_at(&self, x: f64) -> f64 {
        self.grid.cell_of(x).map_or(0.0, |n| self.heights[n])
    }

    /// `∫ |k̃ - other|` over the union of both supports.
    pub fn l1_distance(&self, other: &StepDensity) -> f64 {
        let mut breaks = self.grid.nodes();
        breaks.extend(other.grid.nodes());
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        breaks
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                (self.height_at(mid) - other.height_at(mid)).abs() * (w[1] - w[0])
            })
            .sum()
    }
}

impl FractionalMoments for StepDensity {
    fn fractional_moment(&self, order: f64) -> Result<f64> {
        self.moment_of(order)
    }
}

/// Power `γ` with `k ≈ y_0 (x/x_0)^γ` near the left end, clamped to `γ ≥ -0.9`.
fn left_exponent(nodes: &[f64], heights: &[f64]) -> f64 {
    let j = (heights.len() / 20).max(1);
    if !(heights[0] > 0.0 && heights[j] > 0.0) {
        return 0.0;
    }
    let slope = (heights[j] / heights[0]).ln() / (nodes[j] / nodes[0]).ln();
    slope.max(-0.9)
}
