use serde::{Deserialize, Serialize};

use crate::data::DatasetView;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::nn::{fit_minibatch, mse_loss, Activation, DenseNet, Params, TrainConfig};
use crate::preprocess::Standardizer;
use crate::rng::SeededRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub train: TrainConfig,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden: vec![32, 16],
            activation: Activation::Relu,
            train: TrainConfig::default(),
        }
    }
}

/// Feed-forward regressor; inputs and target are standardized on the
/// training rows and predictions are mapped back to target units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub net: DenseNet,
    pub inputs: Standardizer,
    pub target: Standardizer,
    pub loss_trace: Vec<f64>,
}

pub fn fit_mlp(x: &Matrix, y: &[f64], params: &MlpParams) -> Result<MlpModel> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "mlp targets",
            expected: x.rows(),
            got: y.len(),
        });
    }
    if params.hidden.iter().any(|&h| h == 0) {
        return Err(Error::InvalidArgument(
            "hidden layer widths must be >= 1".into(),
        ));
    }
    let inputs = Standardizer::fit(x)?;
    let target = Standardizer::fit_vector(y)?;
    let xs = inputs.transform(x)?;
    let ys: Vec<f64> = y.iter().map(|v| target.transform_scalar(*v)).collect();

    let mut sizes = vec![x.cols()];
    sizes.extend(&params.hidden);
    sizes.push(1);
    let mut acts = vec![params.activation; params.hidden.len()];
    acts.push(Activation::Identity);
    let mut net = DenseNet::new(&sizes, &acts, &mut SeededRng::new(params.train.seed))?;

    let loss_trace = fit_minibatch(&mut net, ys.len(), &params.train, |m, batch, _| {
        let mut grads = m.zeros_like();
        let mut total = 0.0;
        let scale = 1.0 / batch.len() as f64;
        for &i in batch {
            let trace = m.forward(xs.row(i))?;
            let (loss, d) = mse_loss(trace.output(), &[ys[i]])?;
            total += loss;
            let d: Vec<f64> = d.iter().map(|g| g * scale).collect();
            m.backward(&trace, &d, &mut grads);
        }
        Ok((total * scale, grads.to_flat()))
    })?;
    Ok(MlpModel {
        net,
        inputs,
        target,
        loss_trace,
    })
}

pub fn fit_mlp_view(view: &DatasetView, params: &MlpParams) -> Result<MlpModel> {
    fit_mlp(&view.matrix, &view.targets, params)
}

impl MlpModel {
    pub fn predict_row(&self, x: &[f64]) -> Result<f64> {
        let z = self.net.predict(&self.inputs.transform_row(x)?)?;
        Ok(self.target.inverse_scalar(z[0]))
    }
}
