use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{fit_tree, RegressionTree, SplitPolicy, TreeParams};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::SeededRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub bootstrap: bool,
    pub tree: TreeParams,
    pub seed: u64,
}

impl ForestParams {
    /// Bootstrap rows, exhaustive splits over ⌈d/3⌉ sampled features.
    pub fn random_forest(n_features: usize, seed: u64) -> Self {
        ForestParams {
            n_trees: 100,
            bootstrap: true,
            tree: TreeParams {
                max_features: Some(n_features.div_ceil(3).max(1)),
                ..TreeParams::default()
            },
            seed,
        }
    }

    /// All rows, one random threshold per feature.
    pub fn extra_trees(seed: u64) -> Self {
        ForestParams {
            n_trees: 100,
            bootstrap: false,
            tree: TreeParams {
                policy: SplitPolicy::RandomThreshold,
                ..TreeParams::default()
            },
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<RegressionTree>,
}

/// Trees are grown in parallel; each uses its own stream derived from the
/// seed and its index, so the result does not depend on scheduling.
pub fn fit_forest(x: &Matrix, y: &[f64], params: &ForestParams) -> Result<Forest> {
    if params.n_trees == 0 {
        return Err(Error::InvalidArgument("n_trees must be >= 1".into()));
    }
    if x.rows() == 0 {
        return Err(Error::Empty("forest training rows"));
    }
    let n = x.rows();
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = SeededRng::derive(params.seed, t as u64);
            let rows: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.below(n)).collect()
            } else {
                (0..n).collect()
            };
            fit_tree(x, y, &rows, &params.tree, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Forest { trees })
}

impl Forest {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict_row(x)).sum::<f64>() / self.trees.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data() -> (Matrix, Vec<f64>) {
        let mut rng = SeededRng::new(11);
        let x = Matrix::from_fn(60, 3, |_, _| rng.uniform());
        let y = x
            .row_iter()
            .map(|r| 3.0 * r[0] - r[1] + 0.5 * r[2])
            .collect();
        (x, y)
    }

    #[test]
    fn deterministic_under_seed() {
        let (x, y) = data();
        for p in [
            ForestParams::random_forest(3, 5),
            ForestParams::extra_trees(5),
        ] {
            let p = ForestParams { n_trees: 10, ..p };
            let a = fit_forest(&x, &y, &p).unwrap();
            let b = fit_forest(&x, &y, &p).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn single_tree_forest_matches_tree() {
        let (x, y) = data();
        let p = ForestParams {
            n_trees: 1,
            ..ForestParams::extra_trees(2)
        };
        let f = fit_forest(&x, &y, &p).unwrap();
        let t = fit_tree(
            &x,
            &y,
            &(0..60).collect::<Vec<_>>(),
            &p.tree,
            &mut SeededRng::derive(2, 0),
        )
        .unwrap();
        for r in x.row_iter() {
            assert_eq!(f.predict_row(r), t.predict_row(r));
        }
    }

    #[test]
    fn unbootstrapped_exhaustive_single_tree() {
        let (x, y) = data();
        let p = ForestParams {
            n_trees: 1,
            bootstrap: false,
            tree: TreeParams::default(),
            seed: 4,
        };
        let f = fit_forest(&x, &y, &p).unwrap();
        let t = fit_tree(
            &x,
            &y,
            &(0..60).collect::<Vec<_>>(),
            &TreeParams::default(),
            &mut SeededRng::new(0),
        )
        .unwrap();
        assert_eq!(f.trees[0], t);
    }

    #[test]
    fn constant_target_everywhere() {
        let (x, _) = data();
        for p in [
            ForestParams::random_forest(3, 1),
            ForestParams::extra_trees(1),
        ] {
            let f = fit_forest(&x, &[7.5; 60], &ForestParams { n_trees: 5, ..p }).unwrap();
            assert_eq!(f.predict_row(&[0.2, 0.9, 0.4]), 7.5);
        }
    }

    #[test]
    fn rf_feature_count() {
        assert_eq!(ForestParams::random_forest(3, 0).tree.max_features, Some(1));
        assert_eq!(ForestParams::random_forest(5, 0).tree.max_features, Some(2));
    }

    #[test]
    fn fits_training_data_reasonably() {
        let (x, y) = data();
        let f = fit_forest(
            &x,
            &y,
            &ForestParams {
                n_trees: 20,
                ..ForestParams::random_forest(3, 1)
            },
        )
        .unwrap();
        let mse: f64 = x
            .row_iter()
            .zip(&y)
            .map(|(r, t)| (f.predict_row(r) - t).powi(2))
            .sum::<f64>()
            / 60.0;
        let var = {
            let m = y.iter().sum::<f64>() / 60.0;
            y.iter().map(|v| (v - m).powi(2)).sum::<f64>() / 60.0
        };
        assert!(mse < 0.3 * var, "{mse} vs {var}");
    }
}
