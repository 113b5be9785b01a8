use serde::{Deserialize, Serialize};

use super::{Activation, Params};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::SeededRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    /// `out × in`
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn input_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.rows()
    }
}

/// Fully connected feed-forward network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseNet {
    pub layers: Vec<DenseLayer>,
}

/// Per-layer inputs and outputs of one forward pass.
#[derive(Debug, Clone)]
pub struct DenseTrace {
    pub inputs: Vec<Vec<f64>>,
    pub outputs: Vec<Vec<f64>>,
}

impl DenseTrace {
    pub fn output(&self) -> &[f64] {
        self.outputs.last().map_or(&[], Vec::as_slice)
    }
}

impl DenseNet {
    /// `sizes` lists every width including input and output; one activation
    /// per layer. Weights and biases start uniform in ±1/√fan_in.
    pub fn new(sizes: &[usize], activations: &[Activation], rng: &mut SeededRng) -> Result<Self> {
        if sizes.len() < 2 || activations.len() != sizes.len() - 1 {
            return Err(Error::InvalidArgument(format!(
                "dense net needs n+1 sizes for n activations, got {} sizes and {} activations",
                sizes.len(),
                activations.len()
            )));
        }
        if sizes.contains(&0) {
            return Err(Error::InvalidArgument("zero-width layer".into()));
        }
        let layers = sizes
            .windows(2)
            .zip(activations)
            .map(|(w, &activation)| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let bound = 1.0 / (fan_in as f64).sqrt();
                let weights =
                    Matrix::from_fn(fan_out, fan_in, |_, _| rng.uniform_range(-bound, bound));
                let bias = (0..fan_out)
                    .map(|_| rng.uniform_range(-bound, bound))
                    .collect();
                DenseLayer {
                    weights,
                    bias,
                    activation,
                }
            })
            .collect();
        Ok(DenseNet { layers })
    }

    pub fn from_layers(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidArgument("dense net without layers".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.bias.len() != l.output_dim() {
                return Err(Error::DimensionMismatch {
                    context: "dense bias",
                    expected: l.output_dim(),
                    got: l.bias.len(),
                });
            }
            if i > 0 && layers[i - 1].output_dim() != l.input_dim() {
                return Err(Error::DimensionMismatch {
                    context: "dense layer chain",
                    expected: layers[i - 1].output_dim(),
                    got: l.input_dim(),
                });
            }
        }
        Ok(DenseNet { layers })
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.fill_zero();
        z
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].output_dim()
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "dense input",
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    fn layer_forward(layer: &DenseLayer, x: &[f64]) -> Result<Vec<f64>> {
        let mut z = layer.weights.matvec(x);
        for (zi, b) in z.iter_mut().zip(&layer.bias) {
            *zi = layer.activation.apply(*zi + b);
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dense activation".into()));
        }
        Ok(z)
    }

    pub fn forward(&self, x: &[f64]) -> Result<DenseTrace> {
        self.check_input(x)?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut outputs = Vec::with_capacity(self.layers.len());
        let mut cur = x.to_vec();
        for layer in &self.layers {
            let out = Self::layer_forward(layer, &cur)?;
            inputs.push(cur);
            cur = out.clone();
            outputs.push(out);
        }
        Ok(DenseTrace { inputs, outputs })
    }

    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut cur = x.to_vec();
        for layer in &self.layers {
            cur = Self::layer_forward(layer, &cur)?;
        }
        Ok(cur)
    }

    /// Accumulates parameter gradients into `grads` given `d_out = ∂L/∂output`
    /// and returns `∂L/∂input`.
    pub fn backward(&self, trace: &DenseTrace, d_out: &[f64], grads: &mut DenseNet) -> Vec<f64> {
        let mut delta = d_out.to_vec();
        for (li, layer) in self.layers.iter().enumerate().rev() {
            let out = &trace.outputs[li];
            for (d, y) in delta.iter_mut().zip(out) {
                *d *= layer.activation.derivative_from_output(*y);
            }
            let g = &mut grads.layers[li];
            g.weights.add_outer(1.0, &delta, &trace.inputs[li]);
            for (gb, d) in g.bias.iter_mut().zip(&delta) {
                *gb += d;
            }
            let mut d_in = vec![0.0; layer.input_dim()];
            layer.weights.matvec_t_acc(&delta, &mut d_in);
            delta = d_in;
        }
        delta
    }
}

impl Params for DenseNet {
    fn param_slices(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weights.as_slice(), l.bias.as_slice()])
            .collect()
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [l.weights.as_mut_slice(), l.bias.as_mut_slice()])
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_net_gives_zero() {
        let layer = DenseLayer {
            weights: Matrix::zeros(2, 3),
            bias: vec![0.0; 2],
            activation: Activation::Identity,
        };
        let net = DenseNet::from_layers(vec![layer]).unwrap();
        assert_eq!(net.predict(&[1.0, -2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn scalar_identity_plus_bias() {
        let layer = DenseLayer {
            weights: Matrix::identity(1),
            bias: vec![2.5],
            activation: Activation::Identity,
        };
        let net = DenseNet::from_layers(vec![layer]).unwrap();
        assert_eq!(net.predict(&[4.0]).unwrap(), vec![6.5]);
    }

    #[test]
    fn dimension_errors() {
        let mut rng = SeededRng::new(0);
        let net = DenseNet::new(
            &[3, 4, 1],
            &[Activation::Tanh, Activation::Identity],
            &mut rng,
        )
        .unwrap();
        assert!(matches!(
            net.predict(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(DenseNet::new(&[3, 4], &[Activation::Tanh, Activation::Tanh], &mut rng).is_err());
        let bad = vec![
            DenseLayer {
                weights: Matrix::zeros(4, 3),
                bias: vec![0.0; 4],
                activation: Activation::Tanh,
            },
            DenseLayer {
                weights: Matrix::zeros(1, 5),
                bias: vec![0.0],
                activation: Activation::Identity,
            },
        ];
        assert!(DenseNet::from_layers(bad).is_err());
    }

    #[test]
    fn init_within_fan_in_bound() {
        let mut rng = SeededRng::new(11);
        let net = DenseNet::new(
            &[9, 5, 1],
            &[Activation::Relu, Activation::Identity],
            &mut rng,
        )
        .unwrap();
        let b = 1.0 / 3.0;
        assert!(net.layers[0]
            .weights
            .as_slice()
            .iter()
            .all(|w| w.abs() <= b));
        assert!(net.layers[1]
            .weights
            .as_slice()
            .iter()
            .all(|w| w.abs() <= 1.0 / 5f64.sqrt()));
    }

    #[test]
    fn flat_roundtrip() {
        let mut rng = SeededRng::new(4);
        let net = DenseNet::new(
            &[2, 3, 1],
            &[Activation::Tanh, Activation::Identity],
            &mut rng,
        )
        .unwrap();
        let flat = net.to_flat();
        assert_eq!(flat.len(), 2 * 3 + 3 + 3 + 1);
        let mut other = net.zeros_like();
        other.set_flat(&flat);
        assert_eq!(other, net);
    }
}
