use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::preprocess::Standardizer;

/// k-nearest-neighbour regressor on standardized features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub scaler: Standardizer,
    pub train_x: Matrix,
    pub train_y: Vec<f64>,
}

pub fn fit_knn(x: &Matrix, y: &[f64], k: usize) -> Result<KnnModel> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "knn targets",
            expected: x.rows(),
            got: y.len(),
        });
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    if k > x.rows() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds the {} training rows",
            x.rows()
        )));
    }
    let scaler = Standardizer::fit(x)?;
    Ok(KnnModel {
        k,
        train_x: scaler.transform(x)?,
        scaler,
        train_y: y.to_vec(),
    })
}

impl KnnModel {
    /// Mean target of the `k` nearest training rows by Euclidean distance;
    /// equal distances resolve to the lower training index.
    pub fn predict_row(&self, x: &[f64]) -> Result<f64> {
        knn_predict(self, x, self.k)
    }
}

pub fn knn_predict(model: &KnnModel, x: &[f64], k: usize) -> Result<f64> {
    if k == 0 || k > model.train_y.len() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must lie in 1..={}",
            model.train_y.len()
        )));
    }
    let q = model.scaler.transform_row(x)?;
    let mut dist: Vec<(f64, usize)> = model
        .train_x
        .row_iter()
        .enumerate()
        .map(|(i, row)| {
            let d: f64 = row.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum();
            (d, i)
        })
        .collect();
    dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(dist[..k]
        .iter()
        .map(|(_, i)| model.train_y[*i])
        .sum::<f64>()
        / k as f64)
}
