use serde::{Deserialize, Serialize};

use super::tree::{fit_tree, RegressionTree, TreeParams};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::SeededRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtParams {
    pub n_stages: usize,
    pub learning_rate: f64,
    pub tree: TreeParams,
    pub seed: u64,
}

impl Default for GbtParams {
    fn default() -> Self {
        GbtParams {
            n_stages: 100,
            learning_rate: 0.1,
            tree: TreeParams {
                max_depth: Some(3),
                ..TreeParams::default()
            },
            seed: 0,
        }
    }
}

/// Squared-loss gradient boosting: `F = base + ν Σ tree_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub base: f64,
    pub learning_rate: f64,
    pub stages: Vec<RegressionTree>,
}

pub fn fit_gbt(x: &Matrix, y: &[f64], params: &GbtParams) -> Result<GbtModel> {
    // ν = 0 is accepted and yields the constant mean predictor.
    if !(0.0..=1.0).contains(&params.learning_rate) {
        return Err(Error::InvalidArgument(format!(
            "boosting learning rate must lie in [0, 1], got {}",
            params.learning_rate
        )));
    }
    if y.is_empty() {
        return Err(Error::Empty("boosting training rows"));
    }
    let rows: Vec<usize> = (0..y.len()).collect();
    let base = y.iter().sum::<f64>() / y.len() as f64;
    let mut f = vec![base; y.len()];
    let mut rng = SeededRng::new(params.seed);
    let mut stages = Vec::with_capacity(params.n_stages);
    for _ in 0..params.n_stages {
        let residual: Vec<f64> = y.iter().zip(&f).map(|(t, p)| t - p).collect();
        let tree = fit_tree(x, &residual, &rows, &params.tree, &mut rng)?;
        for (fi, row) in f.iter_mut().zip(x.row_iter()) {
            *fi += params.learning_rate * tree.predict_row(row);
        }
        stages.push(tree);
    }
    Ok(GbtModel {
        base,
        learning_rate: params.learning_rate,
        stages,
    })
}

impl GbtModel {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        self.base + self.learning_rate * self.stages.iter().map(|t| t.predict_row(x)).sum::<f64>()
    }
}
