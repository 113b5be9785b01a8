//! Dense layers, losses, optimizers and finite-difference gradient checks.
//! Every architecture in the crate is built on these pieces with hand-derived
//! backward passes.

mod activation;
mod dense;
mod gradcheck;
mod loss;
pub mod optim;
mod params;
mod train;

pub use activation::{sigmoid, tanh, Activation};
pub use dense::{DenseLayer, DenseNet, DenseTrace};
pub use gradcheck::grad_check;
pub use loss::mse_loss;
pub use optim::{adam_step, sgd_step, AdamState, Optimizer, OptimizerKind, TrainConfig};
pub use params::Params;
pub use train::fit_minibatch;
