use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, solve, Matrix};

pub const RIDGE_FALLBACK: f64 = 1e-8;

/// `y ≈ coef · x + intercept`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub coef: Vec<f64>,
    pub intercept: f64,
    /// Whether the ridge fallback was needed.
    pub regularized: bool,
}

/// Ordinary least squares with intercept via the normal equations. When the
/// Gram matrix is singular, retries with `RIDGE_FALLBACK` added to the
/// diagonal of the non-intercept block.
pub fn fit_linear_regression(x: &Matrix, y: &[f64]) -> Result<LinearModel> {
    let (n, d) = (x.rows(), x.cols());
    if n != y.len() {
        return Err(Error::DimensionMismatch {
            context: "linear regression targets",
            expected: n,
            got: y.len(),
        });
    }
    if n == 0 {
        return Err(Error::Empty("linear regression input"));
    }
    if n < d {
        return Err(Error::InvalidArgument(format!(
            "linear regression needs at least as many rows as features ({n} < {d})"
        )));
    }
    if !x.is_finite() || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("linear regression input".into()));
    }

    // Center to keep the normal equations well conditioned; the intercept is
    // recovered from the means.
    let mean_x: Vec<f64> = (0..d)
        .map(|j| x.column(j).iter().sum::<f64>() / n as f64)
        .collect();
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let xc = Matrix::from_fn(n, d, |i, j| x[(i, j)] - mean_x[j]);
    let yc: Vec<f64> = y.iter().map(|v| v - mean_y).collect();
    let gram = xc.gram();
    let mut rhs = vec![0.0; d];
    xc.matvec_t_acc(&yc, &mut rhs);

    let (coef, regularized) = match solve(&gram, &rhs, 1e-12) {
        Some(c) => (c, false),
        None => {
            let mut g = gram.clone();
            for j in 0..d {
                g[(j, j)] += RIDGE_FALLBACK;
            }
            (solve(&g, &rhs, 1e-300).ok_or(Error::RankDeficient)?, true)
        }
    };
    if d == 0 {
        return Ok(LinearModel {
            coef,
            intercept: mean_y,
            regularized,
        });
    }
    let intercept = mean_y - dot(&coef, &mean_x);
    Ok(LinearModel {
        coef,
        intercept,
        regularized,
    })
}

impl LinearModel {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        dot(&self.coef, x) + self.intercept
    }
}
