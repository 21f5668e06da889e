use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ModelConfig;
use super::mlp::MlpModel;
use super::train::train_model;
use crate::data::Dataset;
use crate::error::{Error, Result};

/// `T` independently initialized and trained networks sharing one config.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Ensemble {
    members: Vec<MlpModel>,
}

impl Ensemble {
    pub fn from_members(members: Vec<MlpModel>) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(Error::Argument("an ensemble needs at least one member".into()));
        };
        if members.iter().any(|m| m.config() != first.config()) {
            return Err(Error::Argument("ensemble members must share one configuration".into()));
        }
        Ok(Self { members })
    }

    /// Trains one member per seed; members train in parallel and are kept in seed order.
    pub fn train(config: &ModelConfig, train: &Dataset, val: &Dataset, seeds: &[u64]) -> Result<Self> {
        let distinct: HashSet<u64> = seeds.iter().copied().collect();
        if distinct.len() != seeds.len() {
            return Err(Error::Argument("ensemble member seeds must be pairwise distinct".into()));
        }
        let members = seeds
            .par_iter()
            .map(|&seed| train_model(config, train, val, seed))
            .collect::<Result<Vec<_>>>()?;
        Self::from_members(members)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[MlpModel] {
        &self.members
    }

    pub fn config(&self) -> &ModelConfig {
        self.members[0].config()
    }
}
