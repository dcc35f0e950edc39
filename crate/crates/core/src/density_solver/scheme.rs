use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use super::grid::GeometricGrid;
use crate::error::{Error, Result};

/// Where in each cell the discretised equation is imposed.
///
/// The equation at `x̂_n = x_n e^{θL}` sees cell `n + m` through the kernel
/// window `log(y/x̂_n) ∈ [(m - θ)L, (m + 1 - θ)L)`, clipped at 0 for `m = 0`.
pub trait CollocationScheme: fmt::Debug + Send + Sync {
    fn name(&self) -> &'static str;

    /// `θ ∈ [0, 1)`: position of the collocation point in a cell, in units of `L`.
    fn fraction(&self) -> f64;

    fn collocation_point(&self, grid: &GeometricGrid, n: usize) -> f64 {
        grid.node(n) * (self.fraction() * grid.log_step()).exp()
    }

    /// Kernel window, in `u = log(y/x̂)`, for the cell `offset` places to the right.
    fn window(&self, offset: usize, log_step: f64) -> (f64, f64) {
        let t = self.fraction();
        let lo = ((offset as f64 - t) * log_step).max(0.0);
        (lo, (offset as f64 + 1.0 - t) * log_step)
    }
}

/// Equation imposed at the left node of every cell.
#[derive(Debug, Clone, Copy, Default)]
pub struct LeftNode;

impl CollocationScheme for LeftNode {
    fn name(&self) -> &'static str {
        "left_node"
    }
    fn fraction(&self) -> f64 {
        0.0
    }
}

/// Equation imposed at the geometric midpoint of every cell; second-order accurate.
#[derive(Debug, Clone, Copy, Default)]
pub struct Midpoint;

impl CollocationScheme for Midpoint {
    fn name(&self) -> &'static str {
        "midpoint"
    }
    fn fraction(&self) -> f64 {
        0.5
    }
}

/// Collocation schemes by name.
#[derive(Debug, Clone)]
pub struct SchemeRegistry {
    schemes: BTreeMap<&'static str, Arc<dyn CollocationScheme>>,
}

impl SchemeRegistry {
    pub const DEFAULT: &'static str = "midpoint";

    pub fn with_builtins() -> Self {
        let mut r = Self {
            schemes: BTreeMap::new(),
        };
        r.register(Arc::new(LeftNode));
        r.register(Arc::new(Midpoint));
        r
    }

    pub fn global() -> &'static SchemeRegistry {
        static REGISTRY: OnceLock<SchemeRegistry> = OnceLock::new();
        REGISTRY.get_or_init(SchemeRegistry::with_builtins)
    }

    pub fn register(&mut self, scheme: Arc<dyn CollocationScheme>) {
        self.schemes.insert(scheme.name(), scheme);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.schemes.keys().copied()
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn CollocationScheme>> {
        self.schemes.get(name).cloned().ok_or_else(|| {
            Error::InvalidSpec(format!(
                "unknown scheme `{name}` (known: {})",
                self.names().collect::<Vec<_>>().join(", ")
            ))
        })
    }
}

impl Default for SchemeRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}
