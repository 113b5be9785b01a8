//! Named model pipelines (`vae+et`, `rf`, `gru`, ...), their fitted state
//! and on-disk checkpoints.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{DatasetView, Feature, ViewKind};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::recurrent::{train_recurrent, Arch, RecurrentConfig, TrainedRecurrent};
use crate::regressors::{fit_regressor, FittedRegressor, RegressorKind, RegressorSpec};
use crate::vae::{extract_latent, vae_train_matrix, LatentMode, TrainedVae, VaeConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pipeline {
    /// Regressor on the view's raw features.
    Raw(RegressorKind),
    /// Regressor on VAE latent means.
    Vae(RegressorKind),
    Recurrent(Arch),
}

impl Pipeline {
    /// Latent-feature pipelines followed by the two recurrent ones.
    pub fn vae_set() -> Vec<Pipeline> {
        let mut v: Vec<Pipeline> = RegressorKind::ALL.into_iter().map(Pipeline::Vae).collect();
        v.extend([
            Pipeline::Recurrent(Arch::Lstm),
            Pipeline::Recurrent(Arch::Gru),
        ]);
        v
    }

    /// Raw-feature pipelines followed by the two recurrent ones.
    pub fn raw_set() -> Vec<Pipeline> {
        let mut v: Vec<Pipeline> = RegressorKind::ALL.into_iter().map(Pipeline::Raw).collect();
        v.extend([
            Pipeline::Recurrent(Arch::Lstm),
            Pipeline::Recurrent(Arch::Gru),
        ]);
        v
    }

    /// The pipeline set reported for a view: VAE variants on D1, raw
    /// features on the two-feature views.
    pub fn all_for_view(view: ViewKind) -> Vec<Pipeline> {
        match view {
            ViewKind::D1 => Pipeline::vae_set(),
            ViewKind::D2Mte | ViewKind::D2Ete => Pipeline::raw_set(),
        }
    }
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pipeline::Raw(k) => write!(f, "{k}"),
            Pipeline::Vae(k) => write!(f, "vae+{k}"),
            Pipeline::Recurrent(a) => write!(f, "{a}"),
        }
    }
}

impl FromStr for Pipeline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let unknown = || Error::UnknownPipeline(s.to_string());
        match lower.as_str() {
            "lstm" => Ok(Pipeline::Recurrent(Arch::Lstm)),
            "gru" => Ok(Pipeline::Recurrent(Arch::Gru)),
            _ => match lower.strip_prefix("vae+") {
                Some(rest) => rest.parse().map(Pipeline::Vae).map_err(|_| unknown()),
                None => lower.parse().map(Pipeline::Raw).map_err(|_| unknown()),
            },
        }
    }
}

impl Serialize for Pipeline {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Pipeline {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Hyperparameters for every pipeline component. Seeds inside are
/// overwritten by the seed passed to `fit_pipeline`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub regressor: RegressorSpec,
    pub vae: VaeConfig,
    pub recurrent: RecurrentConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            regressor: RegressorSpec::new(RegressorKind::Lr),
            vae: VaeConfig::default(),
            recurrent: RecurrentConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "lowercase")]
pub enum FittedPipeline {
    Raw {
        regressor: FittedRegressor,
    },
    Vae {
        vae: TrainedVae,
        regressor: FittedRegressor,
    },
    Recurrent {
        model: TrainedRecurrent,
    },
}

/// Fits `pipeline` on `train`; every fitted statistic comes from these rows.
pub fn fit_pipeline(
    pipeline: Pipeline,
    cfg: &PipelineConfig,
    train: &DatasetView,
    seed: u64,
) -> Result<FittedPipeline> {
    if train.is_empty() {
        return Err(Error::EmptyView {
            view: train.name.clone(),
            excluded: train.excluded,
        });
    }
    let spec = |kind| {
        let mut s = cfg.regressor.clone().with_seed(seed);
        s.kind = kind;
        s
    };
    match pipeline {
        Pipeline::Raw(kind) => Ok(FittedPipeline::Raw {
            regressor: fit_regressor(&spec(kind), &train.matrix, &train.targets)?,
        }),
        Pipeline::Vae(kind) => {
            let mut vc = cfg.vae.clone();
            vc.train.seed = seed;
            let vae = vae_train_matrix(&train.matrix, &vc)?;
            let latents = extract_latent(&vae, &train.matrix, LatentMode::Mean, seed)?;
            let regressor = fit_regressor(&spec(kind), &latents, &train.targets)?;
            Ok(FittedPipeline::Vae { vae, regressor })
        }
        Pipeline::Recurrent(arch) => {
            let mut rc = cfg.recurrent.clone();
            rc.train.seed = seed;
            Ok(FittedPipeline::Recurrent {
                model: train_recurrent(train, arch, &rc)?,
            })
        }
    }
}

impl FittedPipeline {
    pub fn n_features(&self) -> usize {
        match self {
            FittedPipeline::Raw { regressor } => regressor.n_features(),
            FittedPipeline::Vae { vae, .. } => vae.model.input_dim(),
            FittedPipeline::Recurrent { model } => model.feature_names.len(),
        }
    }

    /// Final-epoch training loss of the neural component, if any.
    pub fn final_training_loss(&self) -> Option<f64> {
        match self {
            FittedPipeline::Raw {
                regressor: FittedRegressor::Mlp { model, .. },
            } => model.loss_trace.last().copied(),
            FittedPipeline::Raw { .. } => None,
            FittedPipeline::Vae { vae, .. } => vae.loss_trace.last().copied(),
            FittedPipeline::Recurrent { model } => model.loss_trace.last().copied(),
        }
    }

    /// Predicted totals for raw view rows.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.cols() != self.n_features() {
            return Err(Error::DimensionMismatch {
                context: "pipeline input features",
                expected: self.n_features(),
                got: x.cols(),
            });
        }
        let out = match self {
            FittedPipeline::Raw { regressor } => regressor.predict(x)?,
            FittedPipeline::Vae { vae, regressor } => {
                regressor.predict(&extract_latent(vae, x, LatentMode::Mean, 0)?)?
            }
            FittedPipeline::Recurrent { model } => model.predict_matrix(x)?,
        };
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("pipeline prediction".into()));
        }
        Ok(out)
    }
}

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub pipeline: Pipeline,
    pub view: ViewKind,
    pub feature_names: Vec<Feature>,
    pub seed: u64,
    pub model: FittedPipeline,
}

impl Checkpoint {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Checkpoint(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cp: Checkpoint =
            serde_json::from_str(text).map_err(|e| Error::Checkpoint(e.to_string()))?;
        if cp.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported checkpoint version {} (expected {CHECKPOINT_VERSION})",
                cp.version
            )));
        }
        if cp.feature_names.len() != cp.model.n_features() {
            return Err(Error::Checkpoint(
                "feature list does not match the model".into(),
            ));
        }
        Ok(cp)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}
