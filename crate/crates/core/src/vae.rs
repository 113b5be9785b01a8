//! Variational auto-encoder over standardized feature vectors.
//!
//! The encoder emits `(μ, log σ)` per latent coordinate; training samples
//! `z = μ + σ ⊙ ε` with `ε ~ N(0, I)` and minimizes reconstruction MSE plus
//! `kl_weight` times the KL divergence to the `N(0, I)` prior. Downstream
//! regressors consume `μ`.

use serde::{Deserialize, Serialize};

use crate::data::DatasetView;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::nn::{fit_minibatch, mse_loss, Activation, DenseLayer, DenseNet, Params, TrainConfig};
use crate::preprocess::Standardizer;
use crate::rng::SeededRng;

/// KL divergence between diagonal Gaussians `N(μ_i, σ_i²)` and `N(μ_j, σ_j²)`,
/// summed over coordinates.
pub fn kl_divergence_general(
    mu_i: &[f64],
    sigma_i: &[f64],
    mu_j: &[f64],
    sigma_j: &[f64],
) -> Result<f64> {
    let n = mu_i.len();
    for (ctx, len) in [
        ("sigma_i", sigma_i.len()),
        ("mu_j", mu_j.len()),
        ("sigma_j", sigma_j.len()),
    ] {
        if len != n {
            return Err(Error::InvalidArgument(format!(
                "kl divergence: {ctx} has length {len}, expected {n}"
            )));
        }
    }
    let mut total = 0.0;
    for k in 0..n {
        let (si, sj) = (sigma_i[k], sigma_j[k]);
        if !(si > 0.0) || !(sj > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "kl divergence needs positive sigma, got {si} and {sj}"
            )));
        }
        let dm = mu_i[k] - mu_j[k];
        total += (sj / si).ln() + (si * si + dm * dm) / (2.0 * sj * sj) - 0.5;
    }
    Ok(total)
}

/// KL divergence of `N(μ, σ²)` from `N(0, 1)` with `σ = exp(log_sigma)`:
/// `½ Σ (σ² + μ² − 1 − 2 log σ)`. Returns the value and its gradients with
/// respect to `μ` and `log σ`.
pub fn kl_divergence_standard(mu: &[f64], log_sigma: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
    assert_eq!(mu.len(), log_sigma.len(), "kl: mu and log_sigma lengths");
    let mut total = 0.0;
    let mut d_ls = Vec::with_capacity(mu.len());
    for (m, ls) in mu.iter().zip(log_sigma) {
        let var = (2.0 * ls).exp();
        total += 0.5 * (var + m * m - 1.0 - 2.0 * ls);
        d_ls.push(var - 1.0);
    }
    (total, mu.to_vec(), d_ls)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VaeConfig {
    pub latent_dim: usize,
    /// Hidden widths of both encoder and decoder; empty for linear maps.
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub kl_weight: f64,
    pub train: TrainConfig,
}

impl Default for VaeConfig {
    fn default() -> Self {
        VaeConfig {
            latent_dim: 2,
            hidden: vec![16],
            activation: Activation::Tanh,
            kl_weight: 1.0,
            train: TrainConfig::default(),
        }
    }
}

impl VaeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.latent_dim == 0 {
            return Err(Error::InvalidArgument("latent_dim must be >= 1".into()));
        }
        if !(self.kl_weight >= 0.0 && self.kl_weight.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "kl_weight must be >= 0, got {}",
                self.kl_weight
            )));
        }
        self.train.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VaeModel {
    pub encoder: DenseNet,
    pub decoder: DenseNet,
    pub latent_dim: usize,
    pub kl_weight: f64,
}

/// Per-sample latent encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct VaeLatent {
    pub mu: Vec<f64>,
    pub log_sigma: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub z_sample: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatentMode {
    Mean,
    Sample,
}

impl Params for VaeModel {
    fn param_slices(&self) -> Vec<&[f64]> {
        let mut v = self.encoder.param_slices();
        v.extend(self.decoder.param_slices());
        v
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut v = self.encoder.param_slices_mut();
        v.extend(self.decoder.param_slices_mut());
        v
    }
}

impl VaeModel {
    pub fn new(input_dim: usize, cfg: &VaeConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut rng = SeededRng::new(seed);
        let mut enc_sizes = vec![input_dim];
        enc_sizes.extend(&cfg.hidden);
        enc_sizes.push(2 * cfg.latent_dim);
        let mut dec_sizes = vec![cfg.latent_dim];
        dec_sizes.extend(&cfg.hidden);
        dec_sizes.push(input_dim);
        let mut acts = vec![cfg.activation; cfg.hidden.len()];
        acts.push(Activation::Identity);
        Ok(VaeModel {
            encoder: DenseNet::new(&enc_sizes, &acts, &mut rng)?,
            decoder: DenseNet::new(&dec_sizes, &acts, &mut rng)?,
            latent_dim: cfg.latent_dim,
            kl_weight: cfg.kl_weight,
        })
    }

    /// Linear encoder with `μ = x` and `log σ = 0`; the decoder is a random
    /// linear map. Latent dimension equals the input dimension.
    pub fn with_identity_encoder(input_dim: usize, seed: u64) -> Result<Self> {
        let mut w = Matrix::zeros(2 * input_dim, input_dim);
        for i in 0..input_dim {
            w[(i, i)] = 1.0;
        }
        let encoder = DenseNet::from_layers(vec![DenseLayer {
            weights: w,
            bias: vec![0.0; 2 * input_dim],
            activation: Activation::Identity,
        }])?;
        let mut rng = SeededRng::new(seed);
        let decoder = DenseNet::new(&[input_dim, input_dim], &[Activation::Identity], &mut rng)?;
        Ok(VaeModel {
            encoder,
            decoder,
            latent_dim: input_dim,
            kl_weight: 1.0,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.encoder.input_dim()
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.fill_zero();
        z
    }

    /// `(μ, log σ)` for one standardized input row.
    pub fn encode(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut out = self.encoder.predict(x)?;
        let ls = out.split_off(self.latent_dim);
        Ok((out, ls))
    }

    pub fn decode(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.decoder.predict(z)
    }

    /// Mean over the batch of `recon_mse(x, decode(μ + σ⊙ε)) + kl_weight·KL`
    /// for fixed noise draws `eps[b]`, and its gradient.
    pub fn loss_and_grad(&self, xs: &[&[f64]], eps: &[Vec<f64>]) -> Result<(f64, VaeModel)> {
        if xs.len() != eps.len() {
            return Err(Error::DimensionMismatch {
                context: "vae noise draws",
                expected: xs.len(),
                got: eps.len(),
            });
        }
        if xs.is_empty() {
            return Err(Error::Empty("batch"));
        }
        let n = xs.len() as f64;
        let l = self.latent_dim;
        let mut grads = self.zeros_like();
        let mut loss = 0.0;
        for (x, e) in xs.iter().zip(eps) {
            let enc = self.encoder.forward(x)?;
            let out = enc.output();
            let (mu, ls) = out.split_at(l);
            let sigma: Vec<f64> = ls.iter().map(|v| v.exp()).collect();
            let z: Vec<f64> = (0..l).map(|k| mu[k] + sigma[k] * e[k]).collect();
            let dec = self.decoder.forward(&z)?;
            let (recon, d_recon) = mse_loss(dec.output(), x)?;
            let (kl, kl_mu, kl_ls) = kl_divergence_standard(mu, ls);
            loss += recon + self.kl_weight * kl;

            let d_xhat: Vec<f64> = d_recon.iter().map(|d| d / n).collect();
            let dz = self.decoder.backward(&dec, &d_xhat, &mut grads.decoder);
            let mut d_enc = vec![0.0; 2 * l];
            for k in 0..l {
                d_enc[k] = dz[k] + self.kl_weight * kl_mu[k] / n;
                d_enc[l + k] = dz[k] * sigma[k] * e[k] + self.kl_weight * kl_ls[k] / n;
            }
            self.encoder.backward(&enc, &d_enc, &mut grads.encoder);
        }
        if !loss.is_finite() || !grads.all_finite() {
            return Err(Error::NonFinite("vae loss".into()));
        }
        Ok((loss / n, grads))
    }
}

/// A VAE with the standardization it was trained under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedVae {
    pub model: VaeModel,
    pub inputs: Standardizer,
    pub loss_trace: Vec<f64>,
}

fn standard_normal_vec(n: usize, rng: &mut SeededRng) -> Vec<f64> {
    (0..n).map(|_| rng.normal()).collect()
}

pub fn vae_train(view: &DatasetView, cfg: &VaeConfig) -> Result<TrainedVae> {
    vae_train_matrix(&view.matrix, cfg)
}

pub fn vae_train_matrix(x: &Matrix, cfg: &VaeConfig) -> Result<TrainedVae> {
    cfg.validate()?;
    if x.rows() == 0 {
        return Err(Error::Empty("training view"));
    }
    let inputs = Standardizer::fit(x)?;
    let xs = inputs.transform(x)?;
    let mut model = VaeModel::new(x.cols(), cfg, cfg.train.seed)?;
    let l = cfg.latent_dim;
    let loss_trace = fit_minibatch(&mut model, xs.rows(), &cfg.train, |m, batch, rng| {
        let rows: Vec<&[f64]> = batch.iter().map(|&i| xs.row(i)).collect();
        let eps: Vec<Vec<f64>> = batch.iter().map(|_| standard_normal_vec(l, rng)).collect();
        let (loss, g) = m.loss_and_grad(&rows, &eps)?;
        Ok((loss, g.to_flat()))
    })?;
    Ok(TrainedVae {
        model,
        inputs,
        loss_trace,
    })
}

impl TrainedVae {
    /// Latent encodings of raw feature rows. `seed` drives the ε draws in
    /// sample mode and is ignored in mean mode.
    pub fn latents(&self, x: &Matrix, seed: u64) -> Result<Vec<VaeLatent>> {
        if x.cols() != self.model.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "vae input features",
                expected: self.model.input_dim(),
                got: x.cols(),
            });
        }
        let mut rng = SeededRng::new(seed);
        x.row_iter()
            .map(|row| {
                let (mu, log_sigma) = self.model.encode(&self.inputs.transform_row(row)?)?;
                let epsilon = standard_normal_vec(mu.len(), &mut rng);
                let z_sample = (0..mu.len())
                    .map(|k| mu[k] + log_sigma[k].exp() * epsilon[k])
                    .collect();
                Ok(VaeLatent {
                    mu,
                    log_sigma,
                    epsilon,
                    z_sample,
                })
            })
            .collect()
    }

    /// Mean reconstruction MSE (in standardized units) decoding from `μ`.
    pub fn reconstruction_mse(&self, x: &Matrix) -> Result<f64> {
        let mut total = 0.0;
        for row in x.row_iter() {
            let s = self.inputs.transform_row(row)?;
            let (mu, _) = self.model.encode(&s)?;
            total += mse_loss(&self.model.decode(&mu)?, &s)?.0;
        }
        Ok(total / x.rows() as f64)
    }
}

/// Latent matrix (`n × latent_dim`) for `x` in the given mode.
pub fn extract_latent(vae: &TrainedVae, x: &Matrix, mode: LatentMode, seed: u64) -> Result<Matrix> {
    let lat = vae.latents(x, seed)?;
    let rows: Vec<Vec<f64>> = lat
        .into_iter()
        .map(|l| match mode {
            LatentMode::Mean => l.mu,
            LatentMode::Sample => l.z_sample,
        })
        .collect();
    if rows.is_empty() {
        return Ok(Matrix::zeros(0, vae.model.latent_dim));
    }
    Matrix::from_rows(&rows)
}
