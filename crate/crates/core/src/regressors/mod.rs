//! Tabular regressors: least squares, k-nearest neighbours, tree ensembles,
//! gradient boosting and a feed-forward network.

mod forest;
mod gbt;
mod knn;
mod linear;
mod mlp;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use forest::{fit_forest, Forest, ForestParams};
pub use gbt::{fit_gbt, GbtModel, GbtParams};
pub use knn::{fit_knn, knn_predict, KnnModel};
pub use linear::{fit_linear_regression, LinearModel, RIDGE_FALLBACK};
pub use mlp::{fit_mlp, fit_mlp_view, MlpModel, MlpParams};
pub use tree::{fit_tree, Node, RegressionTree, SplitPolicy, TreeParams};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegressorKind {
    Mlp,
    Lr,
    Et,
    Rf,
    /// Gradient-boosted trees.
    Xgb,
    Knn,
}

impl RegressorKind {
    pub const ALL: [RegressorKind; 6] = [
        RegressorKind::Mlp,
        RegressorKind::Lr,
        RegressorKind::Et,
        RegressorKind::Rf,
        RegressorKind::Xgb,
        RegressorKind::Knn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RegressorKind::Mlp => "mlp",
            RegressorKind::Lr => "lr",
            RegressorKind::Et => "et",
            RegressorKind::Rf => "rf",
            RegressorKind::Xgb => "xgb",
            RegressorKind::Knn => "knn",
        }
    }
}

impl fmt::Display for RegressorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for RegressorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        RegressorKind::ALL
            .into_iter()
            .find(|k| k.name() == lower)
            .ok_or_else(|| Error::UnknownPipeline(s.to_string()))
    }
}

/// Hyperparameters for every regressor kind. Fields not used by the chosen
/// kind are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressorSpec {
    pub kind: RegressorKind,
    pub knn_k: usize,
    pub n_trees: usize,
    pub tree_max_depth: Option<usize>,
    pub tree_min_leaf: usize,
    pub gbt: GbtParams,
    pub mlp: MlpParams,
    pub seed: u64,
}

impl RegressorSpec {
    pub fn new(kind: RegressorKind) -> Self {
        RegressorSpec {
            kind,
            knn_k: 5,
            n_trees: 100,
            tree_max_depth: Some(10),
            tree_min_leaf: 2,
            gbt: GbtParams::default(),
            mlp: MlpParams::default(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.knn_k == 0 {
            return bad("knn k must be >= 1");
        }
        if self.n_trees == 0 {
            return bad("n_trees must be >= 1");
        }
        if self.tree_max_depth == Some(0) || self.gbt.tree.max_depth == Some(0) {
            return bad("tree depth must be >= 1");
        }
        if self.tree_min_leaf == 0 || self.gbt.tree.min_leaf == 0 {
            return bad("min_leaf must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.gbt.learning_rate) {
            return bad("boosting learning rate must lie in [0, 1]");
        }
        if self.mlp.hidden.iter().any(|&h| h == 0) {
            return bad("mlp hidden widths must be >= 1");
        }
        self.mlp.train.validate()
    }

    /// Sets the seed for every stochastic component.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.gbt.seed = seed;
        self.mlp.train.seed = seed;
        self
    }

    fn forest_params(&self, n_features: usize) -> ForestParams {
        let mut p = match self.kind {
            RegressorKind::Rf => ForestParams::random_forest(n_features, self.seed),
            _ => ForestParams::extra_trees(self.seed),
        };
        p.n_trees = self.n_trees;
        p.tree.max_depth = self.tree_max_depth;
        p.tree.min_leaf = self.tree_min_leaf;
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FittedRegressor {
    Linear {
        n_features: usize,
        model: LinearModel,
    },
    Knn {
        n_features: usize,
        model: KnnModel,
    },
    Forest {
        n_features: usize,
        model: Forest,
    },
    Boosted {
        n_features: usize,
        model: GbtModel,
    },
    Mlp {
        n_features: usize,
        model: MlpModel,
    },
}

pub fn fit_regressor(spec: &RegressorSpec, x: &Matrix, y: &[f64]) -> Result<FittedRegressor> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "regressor targets",
            expected: x.rows(),
            got: y.len(),
        });
    }
    if x.rows() == 0 {
        return Err(Error::Empty("regressor training rows"));
    }
    if !x.is_finite() || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("regressor training data".into()));
    }
    spec.validate()?;
    let n_features = x.cols();
    Ok(match spec.kind {
        RegressorKind::Lr => FittedRegressor::Linear {
            n_features,
            model: fit_linear_regression(x, y)?,
        },
        RegressorKind::Knn => FittedRegressor::Knn {
            n_features,
            model: fit_knn(x, y, spec.knn_k)?,
        },
        RegressorKind::Rf | RegressorKind::Et => FittedRegressor::Forest {
            n_features,
            model: fit_forest(x, y, &spec.forest_params(n_features))?,
        },
        RegressorKind::Xgb => FittedRegressor::Boosted {
            n_features,
            model: fit_gbt(x, y, &spec.gbt)?,
        },
        RegressorKind::Mlp => FittedRegressor::Mlp {
            n_features,
            model: fit_mlp(x, y, &spec.mlp)?,
        },
    })
}

impl FittedRegressor {
    pub fn n_features(&self) -> usize {
        match self {
            FittedRegressor::Linear { n_features, .. }
            | FittedRegressor::Knn { n_features, .. }
            | FittedRegressor::Forest { n_features, .. }
            | FittedRegressor::Boosted { n_features, .. }
            | FittedRegressor::Mlp { n_features, .. } => *n_features,
        }
    }

    pub fn predict_row(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features() {
            return Err(Error::DimensionMismatch {
                context: "regressor input",
                expected: self.n_features(),
                got: x.len(),
            });
        }
        Ok(match self {
            FittedRegressor::Linear { model, .. } => model.predict_row(x),
            FittedRegressor::Knn { model, .. } => model.predict_row(x)?,
            FittedRegressor::Forest { model, .. } => model.predict_row(x),
            FittedRegressor::Boosted { model, .. } => model.predict_row(x),
            FittedRegressor::Mlp { model, .. } => model.predict_row(x)?,
        })
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.cols() != self.n_features() {
            return Err(Error::DimensionMismatch {
                context: "regressor input",
                expected: self.n_features(),
                got: x.cols(),
            });
        }
        x.row_iter().map(|r| self.predict_row(r)).collect()
    }
}
