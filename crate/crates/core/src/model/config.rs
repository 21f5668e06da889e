use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::AdamConfig;

/// Output head family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Head {
    /// Single logit head followed by softmax.
    Homoscedastic,
    /// Gaussian logits: a ReLU μ head and a softplus σ head.
    Heteroscedastic,
}

impl fmt::Display for Head {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Head::Homoscedastic => "homo",
            Head::Heteroscedastic => "hetero",
        })
    }
}

impl FromStr for Head {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "homo" | "homoscedastic" => Ok(Head::Homoscedastic),
            "hetero" | "heteroscedastic" => Ok(Head::Heteroscedastic),
            other => Err(Error::Config(format!("unknown head `{other}` (expected homo|hetero)"))),
        }
    }
}

pub const N_CLASSES: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub input_dim: usize,
    pub hidden_layers: usize,
    pub hidden_width: usize,
    pub dropout: f64,
    pub head: Head,
    pub adam: AdamConfig,
    pub max_epochs: usize,
    pub patience: usize,
    pub batch_size: usize,
    /// Logit samples per instance for the Gaussian-logit loss and predictions.
    pub s_logit: usize,
}

impl ModelConfig {
    pub fn new(input_dim: usize, head: Head) -> Self {
        Self {
            input_dim,
            hidden_layers: 3,
            hidden_width: 300,
            dropout: 0.1,
            head,
            adam: AdamConfig::default(),
            max_epochs: 200,
            patience: 5,
            batch_size: 64,
            s_logit: 50,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.input_dim == 0 {
            return bad("input_dim must be >= 1".into());
        }
        if self.hidden_width == 0 {
            return bad("hidden_width must be >= 1".into());
        }
        if self.patience == 0 {
            return bad("patience must be >= 1".into());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout must lie in [0, 1), got {}", self.dropout));
        }
        if self.max_epochs == 0 || self.batch_size == 0 || self.s_logit == 0 {
            return bad("max_epochs, batch_size and s_logit must be >= 1".into());
        }
        if !(self.adam.learning_rate > 0.0) {
            return bad(format!("learning rate must be > 0, got {}", self.adam.learning_rate));
        }
        Ok(())
    }
}
