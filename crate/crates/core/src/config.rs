//! Flat `key = value` settings shared by every command.
//!
//! Files hold one assignment per line; `#` starts a comment. Assignments are
//! applied in order, so `--set` overrides given after `--config` win.
//!
//! | key | meaning |
//! |---|---|
//! | `weights.<f>`, `maxima.<f>` | scoring weights and per-component maxima |
//! | `synth.n`, `synth.seed`, `synth.noise_sd`, `synth.default_loading` | generator scalars |
//! | `synth.corr.<f>`, `synth.mean.<f>`, `synth.sd.<f>` | per-component targets; `synth.corr.<f> = none` drops a target |
//! | `train.{epochs,learning_rate,batch_size,optimizer}` | all neural models at once |
//! | `mlp.hidden`, `mlp.{epochs,learning_rate,batch_size}` | MLP regressor |
//! | `vae.{latent_dim,hidden,kl_weight,epochs,learning_rate,batch_size}` | VAE |
//! | `rnn.{hidden,head,epochs,learning_rate,batch_size,clip_norm}` | LSTM/GRU |
//! | `knn.k`, `forest.n_trees`, `tree.max_depth`, `tree.min_leaf` | neighbour and forest models |
//! | `gbt.{stages,learning_rate,max_depth}` | boosting |
//! | `cv.folds`, `cv.test_fraction`, `cv.seed` | cross-validation |
//!
//! `<f>` is one of `t1, t2, cw, mte, ete`. Lists are comma separated;
//! `tree.max_depth = none` and `rnn.clip_norm = none` disable the limit.

use std::path::Path;
use std::str::FromStr;

use crate::data::{Feature, Maxima, WeightVector};
use crate::error::{Error, Result};
use crate::eval::CvConfig;
use crate::ingest::SynthSpec;
use crate::nn::TrainConfig;
use crate::pipeline::PipelineConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub weights: [f64; 5],
    pub maxima: Maxima,
    /// Generator settings; weights and maxima are taken from the fields above.
    pub synth: SynthSpec,
    pub pipeline: PipelineConfig,
    pub cv: CvConfig,
}

impl Default for Settings {
    fn default() -> Self {
        let synth = SynthSpec::default();
        let mut weights = [0.0; 5];
        weights.copy_from_slice(synth.weights.as_slice());
        Settings {
            weights,
            maxima: synth.maxima,
            synth,
            pipeline: PipelineConfig::default(),
            cv: CvConfig::default(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("invalid value `{value}` for `{key}`")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<usize>> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| parse(key, v)).collect()
}

fn parse_opt<T: FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    if value.trim().eq_ignore_ascii_case("none") {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

fn apply_train(t: &mut TrainConfig, field: &str, key: &str, value: &str) -> Result<bool> {
    match field {
        "epochs" => t.epochs = parse(key, value)?,
        "learning_rate" => t.learning_rate = parse(key, value)?,
        "batch_size" => t.batch_size = parse(key, value)?,
        "optimizer" => t.optimizer = value.parse()?,
        _ => return Ok(false),
    }
    Ok(true)
}

impl Settings {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        let unknown = || Error::InvalidArgument(format!("unknown setting `{key}`"));
        let (section, rest) = key.split_once('.').ok_or_else(unknown)?;
        let p = &mut self.pipeline;
        match (section, rest) {
            ("weights", f) => self.weights[f.parse::<Feature>()?.index()] = parse(key, value)?,
            ("maxima", f) => self.maxima.0[f.parse::<Feature>()?.index()] = parse(key, value)?,
            ("synth", "n") => self.synth.n_students = parse(key, value)?,
            ("synth", "seed") => self.synth.seed = parse(key, value)?,
            ("synth", "noise_sd") => self.synth.noise_sd = parse(key, value)?,
            ("synth", "default_loading") => self.synth.default_loading = parse(key, value)?,
            ("synth", r) => {
                let (field, f) = r.split_once('.').ok_or_else(unknown)?;
                let f: Feature = f.parse()?;
                match field {
                    "corr" => match parse_opt(key, value)? {
                        Some(r) => {
                            self.synth.target_correlations.insert(f, r);
                        }
                        None => {
                            self.synth.target_correlations.remove(&f);
                        }
                    },
                    "mean" => self.synth.means[f.index()] = parse(key, value)?,
                    "sd" => self.synth.sds[f.index()] = parse(key, value)?,
                    _ => return Err(unknown()),
                }
            }
            ("train", field) => {
                let mut hit = false;
                for t in [
                    &mut p.regressor.mlp.train,
                    &mut p.vae.train,
                    &mut p.recurrent.train,
                ] {
                    hit = apply_train(t, field, key, value)?;
                }
                if !hit {
                    return Err(unknown());
                }
            }
            ("mlp", "hidden") => p.regressor.mlp.hidden = parse_list(key, value)?,
            ("mlp", field) => {
                if !apply_train(&mut p.regressor.mlp.train, field, key, value)? {
                    return Err(unknown());
                }
            }
            ("vae", "latent_dim") => p.vae.latent_dim = parse(key, value)?,
            ("vae", "hidden") => p.vae.hidden = parse_list(key, value)?,
            ("vae", "kl_weight") => p.vae.kl_weight = parse(key, value)?,
            ("vae", field) => {
                if !apply_train(&mut p.vae.train, field, key, value)? {
                    return Err(unknown());
                }
            }
            ("rnn", "hidden") => p.recurrent.hidden_size = parse(key, value)?,
            ("rnn", "head") => p.recurrent.head_sizes = parse_list(key, value)?,
            ("rnn", "clip_norm") => p.recurrent.train.clip_norm = parse_opt(key, value)?,
            ("rnn", field) => {
                if !apply_train(&mut p.recurrent.train, field, key, value)? {
                    return Err(unknown());
                }
            }
            ("knn", "k") => p.regressor.knn_k = parse(key, value)?,
            ("forest", "n_trees") => p.regressor.n_trees = parse(key, value)?,
            ("tree", "max_depth") => p.regressor.tree_max_depth = parse_opt(key, value)?,
            ("tree", "min_leaf") => p.regressor.tree_min_leaf = parse(key, value)?,
            ("gbt", "stages") => p.regressor.gbt.n_stages = parse(key, value)?,
            ("gbt", "learning_rate") => p.regressor.gbt.learning_rate = parse(key, value)?,
            ("gbt", "max_depth") => p.regressor.gbt.tree.max_depth = parse_opt(key, value)?,
            ("cv", "folds") => self.cv.n_folds = parse(key, value)?,
            ("cv", "test_fraction") => self.cv.test_fraction = parse(key, value)?,
            ("cv", "seed") => self.cv.seed = parse(key, value)?,
            _ => return Err(unknown()),
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment.split_once('=').ok_or_else(|| {
            Error::InvalidArgument(format!("expected key=value, got `{assignment}`"))
        })?;
        self.set(k, v)
    }

    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            self.apply_override(line)
                .map_err(|e| Error::InvalidArgument(format!("config line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_str(&text)
    }

    pub fn weight_vector(&self) -> Result<WeightVector> {
        WeightVector::new(self.weights.to_vec())
    }

    /// The generator spec with these weights and maxima.
    pub fn synth_spec(&self) -> Result<SynthSpec> {
        let mut s = self.synth.clone();
        s.weights = self.weight_vector()?;
        s.maxima = self.maxima;
        s.validate()?;
        Ok(s)
    }
}
