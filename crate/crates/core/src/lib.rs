pub mod cli;
pub mod config;
pub mod data;
pub mod eda;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod matrix;
pub mod nn;
pub mod pipeline;
pub mod preprocess;
pub mod recurrent;
pub mod regressors;
pub mod rng;
pub mod vae;

pub use error::{Error, ErrorKind, Result};
