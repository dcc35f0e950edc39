use crate::error::{Error, Result};

/// Extrapolated value of `f(x)` as `x → 0⁺`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limit {
    pub value: f64,
    pub uncertainty: f64,
}

/// Estimates `lim_{x↓0} f(x)` from samples `(x, f(x))` with strictly decreasing `x`.
///
/// The limit is the intercept of a least-squares quadratic in `x`. The
/// uncertainty adds the gap to the linear-fit intercept (a Richardson-style
/// model error) and the standard error of the quadratic intercept.
pub fn extrapolate_limit(samples: &[(f64, f64)]) -> Result<Limit> {
    if samples.len() < 3 {
        return Err(Error::Domain(format!(
            "need at least 3 samples, got {}",
            samples.len()
        )));
    }
    if samples.windows(2).any(|w| !(w[1].0 < w[0].0)) || samples.iter().any(|s| !(s.0 > 0.0)) {
        return Err(Error::Domain(
            "sample abscissae must be positive and strictly decreasing".into(),
        ));
    }
    if samples.iter().any(|s| !s.1.is_finite()) {
        return Err(Error::IllConditioned("non-finite sample value".into()));
    }
    let scale = samples[0].0;
    let xs: Vec<f64> = samples.iter().map(|s| s.0 / scale).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1).collect();

    let linear = poly_fit(&xs, &ys, 1)?;
    let quadratic = poly_fit(&xs, &ys, 2)?;
    let value = quadratic.coeffs[0];

    let worst_residual = linear.residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    if !value.is_finite() || worst_residual > 0.1 * value.abs() {
        return Err(Error::IllConditioned(format!(
            "residual {worst_residual:e} against limit {value:e}"
        )));
    }
    let uncertainty = (value - linear.coeffs[0]).abs() + quadratic.intercept_stderr;
    Ok(Limit { value, uncertainty })
}

struct Fit {
    coeffs: Vec<f64>,
    residuals: Vec<f64>,
    intercept_stderr: f64,
}

fn poly_fit(xs: &[f64], ys: &[f64], degree: usize) -> Result<Fit> {
    let m = degree + 1;
    let mut normal = vec![vec![0.0; m]; m];
    let mut rhs = vec![0.0; m];
    for (&x, &y) in xs.iter().zip(ys) {
        let powers: Vec<f64> = (0..m).map(|k| x.powi(k as i32)).collect();
        for i in 0..m {
            rhs[i] += powers[i] * y;
            for j in 0..m {
                normal[i][j] += powers[i] * powers[j];
            }
        }
    }
    let inverse =
        invert(&normal).ok_or_else(|| Error::IllConditioned("singular normal equations".into()))?;
    let coeffs: Vec<f64> = (0..m)
        .map(|i| (0..m).map(|j| inverse[i][j] * rhs[j]).sum())
        .collect();
    let residuals: Vec<f64> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| y - (0..m).map(|k| coeffs[k] * x.powi(k as i32)).sum::<f64>())
        .collect();
    let dof = xs.len().saturating_sub(m);
    let intercept_stderr = if dof > 0 {
        let rss: f64 = residuals.iter().map(|r| r * r).sum();
        (rss / dof as f64 * inverse[0][0]).max(0.0).sqrt()
    } else {
        0.0
    };
    Ok(Fit {
        coeffs,
        residuals,
        intercept_stderr,
    })
}

/// Gauss-Jordan inverse with partial pivoting; `None` when singular.
fn invert(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        let p = m[col][col];
        for v in m[col].iter_mut() {
            *v /= p;
        }
        for row in 0..n {
            if row != col {
                let factor = m[row][col];
                if factor != 0.0 {
                    for k in 0..2 * n {
                        m[row][k] -= factor * m[col][k];
                    }
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_samples_recover_intercept() {
        let s: Vec<_> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&x| (x, 2.0 + 3.0 * x))
            .collect();
        let l = extrapolate_limit(&s).unwrap();
        assert!((l.value - 2.0).abs() < 1e-12);
        assert!(l.uncertainty < 1e-12);
    }

    #[test]
    fn exact_ratio_function_for_half_gamma_example() {
        let sp = std::f64::consts::PI.sqrt();
        let f = |x: f64| sp * (-x * x).exp() * (1.0 - x * x).sqrt();
        let s: Vec<_> = [0.04, 0.02, 0.01].iter().map(|&x| (x, f(x))).collect();
        let l = extrapolate_limit(&s).unwrap();
        assert!((l.value - sp).abs() < 1e-4, "{l:?}");
    }

    #[test]
    fn constant_samples() {
        let s: Vec<_> = [0.3, 0.2, 0.1, 0.05].iter().map(|&x| (x, 0.75)).collect();
        let l = extrapolate_limit(&s).unwrap();
        assert!((l.value - 0.75).abs() < 1e-14);
        assert!(l.uncertainty < 1e-12);
    }

    #[test]
    fn rejects_unordered_or_short_input() {
        assert!(extrapolate_limit(&[(0.1, 1.0), (0.2, 1.0), (0.05, 1.0)]).is_err());
        assert!(extrapolate_limit(&[(0.1, 1.0), (0.05, 1.0)]).is_err());
    }

    #[test]
    fn wildly_oscillating_samples_are_ill_conditioned() {
        let s: Vec<_> = (0..10)
            .map(|i| {
                let x = 0.1 / (i as f64 + 1.0);
                (x, if i % 2 == 0 { 1.0 } else { -1.0 })
            })
            .collect();
        assert!(matches!(
            extrapolate_limit(&s),
            Err(Error::IllConditioned(_))
        ));
    }
}
