use rayon::prelude::*;

use super::grid::GeometricGrid;
use super::scheme::CollocationScheme;
use crate::error::Result;
use crate::levy_model::{SubordinatorSpec, TailModel};
use crate::numerics::QuadratureRequest;

/// `W_m = ∫ Π̄(u) e^u du` over the scheme's kernel window for offset `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelWeights {
    values: Vec<f64>,
    scheme: &'static str,
}

impl KernelWeights {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scheme(&self) -> &'static str {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `∫_lo^hi Π̄(u) e^u du`, treating a singular tail at `u = 0`.
pub(crate) fn window_integral(tail: &dyn TailModel, lo: f64, hi: f64) -> Result<f64> {
    let f = |u: f64| {
        let t = tail.eval(u);
        if t == 0.0 {
            0.0
        } else {
            t * u.exp()
        }
    };
    let sing = if lo == 0.0 { tail.singularity() } else { None };
    QuadratureRequest::new(f, lo, hi)
        .tolerances(1e-10, 1e-300)
        .singularity(sing)
        .integrate()
        .map(|e| e.value)
}

/// All `N` weights, computed in parallel.
pub fn kernel_weights(
    spec: &SubordinatorSpec,
    grid: &GeometricGrid,
    scheme: &dyn CollocationScheme,
) -> Result<KernelWeights> {
    let n = grid.cells();
    let tail = spec.tail_model();
    let values = if tail.is_zero() {
        vec![0.0; n]
    } else {
        let l = grid.log_step();
        (0..n)
            .into_par_iter()
            .map(|m| {
                let (lo, hi) = scheme.window(m, l);
                window_integral(tail.as_ref(), lo, hi)
            })
            .collect::<Result<Vec<_>>>()?
    };
    Ok(KernelWeights {
        values,
        scheme: scheme.name(),
    })
}
