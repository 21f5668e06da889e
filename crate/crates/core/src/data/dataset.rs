use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::Matrix;

/// One labeled feature vector. Label 1 is the positive (vulnerability) class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub id: String,
    pub features: Vec<f64>,
    pub label: u8,
    /// Ground-truth corruption marker; only synthetic data carries it.
    pub noise_tag: Option<bool>,
}

impl Instance {
    pub fn new(id: impl Into<String>, features: Vec<f64>, label: u8) -> Self {
        Self {
            id: id.into(),
            features,
            label,
            noise_tag: None,
        }
    }

    pub fn is_noisy(&self) -> bool {
        self.noise_tag == Some(true)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    instances: Vec<Instance>,
    feature_dim: usize,
    provenance: String,
}

impl Dataset {
    pub fn new(instances: Vec<Instance>, provenance: impl Into<String>) -> Result<Self> {
        let feature_dim = instances.first().map_or(0, |i| i.features.len());
        let mut seen = HashSet::with_capacity(instances.len());
        for (row, inst) in instances.iter().enumerate() {
            if inst.features.len() != feature_dim {
                return Err(Error::dim("instance features", feature_dim, inst.features.len()));
            }
            if inst.label > 1 {
                return Err(Error::Argument(format!(
                    "instance {} (row {row}) has label {}; expected 0 or 1",
                    inst.id, inst.label
                )));
            }
            if inst.features.iter().any(|v| !v.is_finite()) {
                return Err(Error::Argument(format!("instance {} has a non-finite feature", inst.id)));
            }
            if !seen.insert(inst.id.as_str()) {
                return Err(Error::Argument(format!("duplicate instance id {}", inst.id)));
            }
        }
        Ok(Self {
            instances,
            feature_dim,
            provenance: provenance.into(),
        })
    }

    /// Builds a dataset from parts already known to satisfy the invariants.
    pub(crate) fn from_parts(instances: Vec<Instance>, feature_dim: usize, provenance: String) -> Self {
        Self {
            instances,
            feature_dim,
            provenance,
        }
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn ids(&self) -> Vec<&str> {
        self.instances.iter().map(|i| i.id.as_str()).collect()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.instances.iter().map(|i| usize::from(i.label)).collect()
    }

    pub fn features(&self) -> Matrix {
        let mut data = Vec::with_capacity(self.len() * self.feature_dim);
        for inst in &self.instances {
            data.extend_from_slice(&inst.features);
        }
        Matrix::from_vec(self.len(), self.feature_dim, data).expect("consistent by construction")
    }

    /// `[negatives, positives]`
    pub fn class_counts(&self) -> [usize; 2] {
        let pos = self.instances.iter().filter(|i| i.label == 1).count();
        [self.len() - pos, pos]
    }

    pub fn has_noise_tags(&self) -> bool {
        self.instances.iter().any(|i| i.noise_tag.is_some())
    }

    pub fn noisy_count(&self) -> usize {
        self.instances.iter().filter(|i| i.is_noisy()).count()
    }

    /// Instances at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset::from_parts(
            indices.iter().map(|&i| self.instances[i].clone()).collect(),
            self.feature_dim,
            self.provenance.clone(),
        )
    }

    /// Appends `other`; ids must stay unique.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        if !self.is_empty() && !other.is_empty() && self.feature_dim != other.feature_dim {
            return Err(Error::dim("Dataset::concat", self.feature_dim, other.feature_dim));
        }
        let mut all = self.instances.clone();
        all.extend(other.instances.iter().cloned());
        Dataset::new(all, self.provenance.clone())
    }

    pub fn with_instances(&self, instances: Vec<Instance>) -> Dataset {
        Dataset::from_parts(instances, self.feature_dim, self.provenance.clone())
    }

    pub(crate) fn instances_mut(&mut self) -> &mut [Instance] {
        &mut self.instances
    }
}
