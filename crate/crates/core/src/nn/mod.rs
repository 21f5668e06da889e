//! Dense numerical kernel: matrices, layers, activations, losses and Adam.

pub mod activation;
pub mod adam;
pub mod layer;
pub mod loss;
mod matrix;

pub use activation::{relu, softmax, softplus};
pub use adam::{AdamConfig, AdamState};
pub use layer::{DropoutLayer, LinearGrads, LinearLayer};
pub use loss::{cross_entropy_loss, stochastic_nll_loss, stochastic_nll_with_noise, LogitNoise};
pub use matrix::Matrix;
