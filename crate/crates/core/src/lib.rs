pub mod cli;
pub mod config;
pub mod curation;
pub mod data;
pub mod error;
pub mod experiments;
pub mod metrics;
pub mod model;
pub mod nn;
pub mod pipeline;
pub mod rng;
pub mod stats;
pub mod uq;

pub use error::{Error, Result};
