//! Homoscedastic and heteroscedastic MLP classifiers, their training protocol,
//! and the vanilla / MC-dropout / ensemble predictors.

pub mod checkpoint;
mod config;
mod ensemble;
mod mlp;
mod predict;
mod train;

pub use config::{Head, ModelConfig, N_CLASSES};
pub use ensemble::Ensemble;
pub use mlp::{EpochRecord, HeadOutput, MlpModel, Mode, SIGMA_FLOOR};
pub use predict::{
    hetero_raw_outputs, predict_ensemble, predict_mc_dropout, predict_vanilla, HeteroDraws, WeightSamples,
};
pub use train::{train_model, EarlyStopping, StopDecision};
