use serde::Serialize;

use crate::error::{Error, Result};
use crate::levy_model::{positive_moments, SubordinatorSpec};

pub const DEFAULT_RATIO: f64 = 0.998;
pub const DEFAULT_CELLS: usize = 4500;

/// Target for the Markov bound `E[I^m] / x_max^m` on the mass above a
/// truncated grid.
pub const TAIL_BOUND: f64 = 1e-6;

const MAX_TRUNCATION: f64 = 1e12;
const MAX_BOUND_ORDER: usize = 8;

/// Nodes `x_n = x_max Δ^{N-n}`, `n = 0..=N`; cell `n` is `[x_n, x_{n+1})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometricGrid {
    x_max: f64,
    ratio: f64,
    cells: usize,
    upper_tail_bound: f64,
}

impl GeometricGrid {
    pub fn new(x_max: f64, ratio: f64, cells: usize) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::Domain(format!(
                "grid ratio {ratio} must lie in (0, 1)"
            )));
        }
        if cells < 10 {
            return Err(Error::Domain(format!("{cells} cells; need at least 10")));
        }
        if !(x_max > 0.0 && x_max.is_finite()) {
            return Err(Error::Domain(format!(
                "grid end {x_max} must be positive and finite"
            )));
        }
        let grid = Self {
            x_max,
            ratio,
            cells,
            upper_tail_bound: 0.0,
        };
        if !(grid.node(0) > 0.0) {
            return Err(Error::Domain(format!(
                "left node underflows: {x_max} * {ratio}^{cells}"
            )));
        }
        Ok(grid)
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    /// `L = -ln Δ`, the width of every cell in `log x`.
    pub fn log_step(&self) -> f64 {
        -self.ratio.ln()
    }

    /// Bound on the law's mass above `x_max` (zero when the support ends there).
    pub fn upper_tail_bound(&self) -> f64 {
        self.upper_tail_bound
    }

    pub fn node(&self, n: usize) -> f64 {
        self.x_max * (-((self.cells - n) as f64) * self.log_step()).exp()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.cells).map(|n| self.node(n)).collect()
    }

    /// Geometric midpoint of cell `n`.
    pub fn midpoint(&self, n: usize) -> f64 {
        self.node(n) * (0.5 * self.log_step()).exp()
    }

    /// Index of the cell containing `x`, if any.
    pub fn cell_of(&self, x: f64) -> Option<usize> {
        if !(x >= self.node(0) && x < self.x_max) {
            return None;
        }
        let k = ((self.x_max / x).ln() / self.log_step()).floor() as i64;
        let n = self.cells as i64 - 1 - k;
        // correct for rounding at the nodes
        let mut n = n.clamp(0, self.cells as i64 - 1) as usize;
        while n > 0 && x < self.node(n) {
            n -= 1;
        }
        while n + 1 < self.cells && x >= self.node(n + 1) {
            n += 1;
        }
        Some(n)
    }

    /// Same `x_max`, ratio `√Δ`, twice the cells; every old node stays a node.
    pub fn refine(&self) -> Self {
        Self {
            x_max: self.x_max,
            ratio: self.ratio.sqrt(),
            cells: 2 * self.cells,
            upper_tail_bound: self.upper_tail_bound,
        }
    }
}

/// Grid for a model: `x_max = 1/c` with drift, otherwise the smallest point
/// where `min_{m ≤ 8} E[I^m]/x^m ≤ 1e-6`, unless `x_max_override` is given.
pub fn build_grid(
    spec: &SubordinatorSpec,
    ratio: f64,
    cells: usize,
    x_max_override: Option<f64>,
) -> Result<GeometricGrid> {
    let c = spec.drift();
    if c > 0.0 {
        if let Some(x) = x_max_override {
            return Err(Error::Truncation(format!(
                "the support ends at 1/c = {}; an explicit end point ({x}) is not allowed with positive drift",
                1.0 / c
            )));
        }
        return GeometricGrid::new(1.0 / c, ratio, cells);
    }
    let moments = positive_moments(spec, MAX_BOUND_ORDER)?.values();
    let markov = |x: f64| {
        (1..=MAX_BOUND_ORDER)
            .map(|m| moments[m] / x.powi(m as i32))
            .fold(f64::INFINITY, f64::min)
    };
    let x_max = match x_max_override {
        Some(x) => x,
        None => (1..=MAX_BOUND_ORDER)
            .map(|m| (moments[m] / TAIL_BOUND).powf(1.0 / m as f64))
            .fold(f64::INFINITY, f64::min),
    };
    if !(x_max <= MAX_TRUNCATION) {
        return Err(Error::Truncation(format!(
            "no end point below {MAX_TRUNCATION:e} bounds the upper tail by {TAIL_BOUND:e} (best {x_max:e})"
        )));
    }
    let mut grid = GeometricGrid::new(x_max, ratio, cells)?;
    grid.upper_tail_bound = markov(x_max).min(1.0);
    Ok(grid)
}
