use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Per-column mean and standard deviation, fitted on training rows only.
/// Columns with zero spread are scaled by 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &Matrix) -> Result<Self> {
        if x.rows() == 0 {
            return Err(Error::Empty("standardization input"));
        }
        let n = x.rows() as f64;
        let mut mean = vec![0.0; x.cols()];
        for row in x.row_iter() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; x.cols()];
        for row in x.row_iter() {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let sd = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Standardizer { mean, sd })
    }

    pub fn fit_vector(y: &[f64]) -> Result<Self> {
        Self::fit(&Matrix::from_vec(y.len(), 1, y.to_vec())?)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "standardizer input",
                expected: self.dim(),
                got: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(&self.mean)
            .zip(&self.sd)
            .map(|((v, m), s)| (v - m) / s)
            .collect())
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        let mut out = Vec::with_capacity(x.rows() * x.cols());
        for row in x.row_iter() {
            out.extend(self.transform_row(row)?);
        }
        Matrix::from_vec(x.rows(), x.cols(), out)
    }

    /// Inverse of a one-column transform.
    pub fn inverse_scalar(&self, z: f64) -> f64 {
        z * self.sd[0] + self.mean[0]
    }

    pub fn transform_scalar(&self, v: f64) -> f64 {
        (v - self.mean[0]) / self.sd[0]
    }
}
