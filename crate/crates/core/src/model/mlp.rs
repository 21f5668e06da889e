use serde::{Deserialize, Serialize};

use super::config::{Head, ModelConfig, N_CLASSES};
use crate::error::{Error, Result};
use crate::nn::activation::{relu_backward, sigmoid, softplus_scalar};
use crate::nn::{relu, DropoutLayer, LinearLayer, Matrix};
use crate::rng::RngStream;

/// Added to the softplus output so σ stays strictly positive when softplus underflows.
pub const SIGMA_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

/// What the network emits for a batch.
#[derive(Debug, Clone, PartialEq)]
pub enum HeadOutput {
    Logits(Matrix),
    Gaussian { mu: Matrix, sigma: Matrix },
}

/// Forward-pass behaviour.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Dropout off, nothing cached.
    Eval,
    /// Dropout on, nothing cached (MC-dropout inference).
    Stochastic,
    /// Dropout on, activations cached for backward.
    Train,
}

/// Fixed-depth MLP: `hidden_layers × (Linear → ReLU → Dropout)` followed by the head.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MlpModel {
    pub(crate) config: ModelConfig,
    pub(crate) hidden: Vec<LinearLayer>,
    pub(crate) dropouts: Vec<DropoutLayer>,
    pub(crate) head_mu: LinearLayer,
    pub(crate) head_sigma: Option<LinearLayer>,
    pub(crate) history: Vec<EpochRecord>,
    pub(crate) trained: bool,
    #[serde(skip)]
    pre_acts: Vec<Matrix>,
    #[serde(skip)]
    head_pre: Option<(Matrix, Option<Matrix>)>,
}

impl MlpModel {
    pub fn new(config: ModelConfig, rng: &mut RngStream) -> Result<Self> {
        config.validate()?;
        let mut hidden = Vec::with_capacity(config.hidden_layers);
        let mut dropouts = Vec::with_capacity(config.hidden_layers);
        let mut fan_in = config.input_dim;
        for _ in 0..config.hidden_layers {
            hidden.push(LinearLayer::init(fan_in, config.hidden_width, rng));
            dropouts.push(DropoutLayer::new(config.dropout)?);
            fan_in = config.hidden_width;
        }
        let head_mu = LinearLayer::init(fan_in, N_CLASSES, rng);
        let head_sigma = match config.head {
            Head::Homoscedastic => None,
            Head::Heteroscedastic => Some(LinearLayer::init(fan_in, N_CLASSES, rng)),
        };
        Ok(Self {
            config,
            hidden,
            dropouts,
            head_mu,
            head_sigma,
            history: Vec::new(),
            trained: false,
            pre_acts: Vec::new(),
            head_pre: None,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn head(&self) -> Head {
        self.config.head
    }

    pub fn history(&self) -> &[EpochRecord] {
        &self.history
    }

    pub fn is_trained(&self) -> bool {
        self.trained
    }

    pub(crate) fn require_trained(&self) -> Result<()> {
        if self.trained {
            Ok(())
        } else {
            Err(Error::State("model has not been trained".into()))
        }
    }

    /// Zeroes the logit/μ head so every input maps to equal logits.
    pub fn zero_head(&mut self) {
        self.head_mu.weights.data_mut().iter_mut().for_each(|w| *w = 0.0);
        self.head_mu.bias.iter_mut().for_each(|b| *b = 0.0);
    }

    /// Marks a hand-built or externally loaded model as ready for inference.
    pub fn mark_trained(&mut self) {
        self.trained = true;
    }

    /// Forward pass without touching any cached state.
    pub fn infer(&self, x: &Matrix, dropout_active: bool, rng: &mut RngStream) -> Result<HeadOutput> {
        if x.cols() != self.config.input_dim {
            return Err(Error::dim("model input", self.config.input_dim, x.cols()));
        }
        let mut h = x.clone();
        for (lin, drop) in self.hidden.iter().zip(&self.dropouts) {
            h = relu(&lin.apply(&h)?);
            if dropout_active {
                // A scratch copy keeps the shared layer untouched.
                h = drop.clone().forward(&h, true, rng);
            }
        }
        self.apply_head(&h)
    }

    fn apply_head(&self, h: &Matrix) -> Result<HeadOutput> {
        let z = self.head_mu.apply(h)?;
        Ok(match &self.head_sigma {
            None => HeadOutput::Logits(z),
            Some(sig) => HeadOutput::Gaussian {
                mu: relu(&z),
                sigma: sig.apply(h)?.map(|v| softplus_scalar(v) + SIGMA_FLOOR),
            },
        })
    }

    /// Forward pass; `Mode::Train` caches what [`MlpModel::backward`] needs.
    pub fn forward(&mut self, x: &Matrix, mode: Mode, rng: &mut RngStream) -> Result<HeadOutput> {
        if mode != Mode::Train {
            return self.infer(x, mode == Mode::Stochastic, rng);
        }
        if x.cols() != self.config.input_dim {
            return Err(Error::dim("model input", self.config.input_dim, x.cols()));
        }
        self.pre_acts.clear();
        let mut h = x.clone();
        for (lin, drop) in self.hidden.iter_mut().zip(self.dropouts.iter_mut()) {
            let pre = lin.forward(&h, true)?;
            h = drop.forward(&relu(&pre), true, rng);
            self.pre_acts.push(pre);
        }
        let z = self.head_mu.forward(&h, true)?;
        let out = match self.head_sigma.as_mut() {
            None => {
                self.head_pre = Some((z.clone(), None));
                HeadOutput::Logits(z)
            }
            Some(sig) => {
                let s_pre = sig.forward(&h, true)?;
                let out = HeadOutput::Gaussian {
                    mu: relu(&z),
                    sigma: s_pre.map(|v| softplus_scalar(v) + SIGMA_FLOOR),
                };
                self.head_pre = Some((z, Some(s_pre)));
                out
            }
        };
        Ok(out)
    }

    /// Backpropagates head-output gradients through the cached training pass.
    ///
    /// `grad_sigma` must be given exactly when the head is heteroscedastic.
    /// Returns parameter gradients in [`MlpModel::params_mut`] order.
    pub fn backward(&mut self, grad_mu: &Matrix, grad_sigma: Option<&Matrix>) -> Result<Vec<Vec<f64>>> {
        let (z_pre, s_pre) = self
            .head_pre
            .take()
            .ok_or_else(|| Error::State("backward without a training forward pass".into()))?;
        let mut head_grads = Vec::new();
        let mut dh = match (&mut self.head_sigma, s_pre, grad_sigma) {
            (None, None, None) => {
                let (dh, g) = self.head_mu.backward(grad_mu)?;
                head_grads.push(g);
                dh
            }
            (Some(sig), Some(s_pre), Some(gs)) => {
                let d_mu_pre = relu_backward(&z_pre, grad_mu);
                let mut d_sigma_pre = gs.clone();
                for (g, &p) in d_sigma_pre.data_mut().iter_mut().zip(s_pre.data()) {
                    *g *= sigmoid(p);
                }
                let (dh_mu, g_mu) = self.head_mu.backward(&d_mu_pre)?;
                let (dh_sig, g_sig) = sig.backward(&d_sigma_pre)?;
                head_grads.push(g_mu);
                head_grads.push(g_sig);
                let mut dh = dh_mu;
                for (a, b) in dh.data_mut().iter_mut().zip(dh_sig.data()) {
                    *a += b;
                }
                dh
            }
            _ => return Err(Error::HeadType),
        };

        let mut hidden_grads = Vec::with_capacity(self.hidden.len());
        let pre_acts = std::mem::take(&mut self.pre_acts);
        for ((lin, drop), pre) in self
            .hidden
            .iter_mut()
            .zip(self.dropouts.iter_mut())
            .zip(&pre_acts)
            .rev()
        {
            let d_act = drop.backward(&dh);
            let d_pre = relu_backward(pre, &d_act);
            let (dx, g) = lin.backward(&d_pre)?;
            hidden_grads.push(g);
            dh = dx;
        }
        hidden_grads.reverse();

        let mut flat = Vec::with_capacity(2 * (hidden_grads.len() + head_grads.len()));
        for g in hidden_grads.into_iter().chain(head_grads) {
            flat.push(g.weights.into_data());
            flat.push(g.bias);
        }
        Ok(flat)
    }

    /// Parameter tensors: each hidden layer's weights and bias, then the μ
    /// (or logit) head, then the σ head if present.
    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        for lin in self.hidden.iter_mut().chain(std::iter::once(&mut self.head_mu)).chain(self.head_sigma.iter_mut()) {
            out.push(lin.weights.data_mut());
            out.push(&mut lin.bias);
        }
        out
    }

    pub fn param_sizes(&self) -> Vec<usize> {
        self.layers()
            .flat_map(|l| [l.weights.data().len(), l.bias.len()])
            .collect()
    }

    pub(crate) fn layers(&self) -> impl Iterator<Item = &LinearLayer> {
        self.hidden.iter().chain(std::iter::once(&self.head_mu)).chain(self.head_sigma.iter())
    }

    /// Flattened copy of every parameter, in [`MlpModel::params_mut`] order.
    pub fn param_vector(&self) -> Vec<f64> {
        self.layers()
            .flat_map(|l| l.weights.data().iter().chain(&l.bias).copied())
            .collect()
    }

    pub(crate) fn load_param_vector(&mut self, values: &[f64]) {
        let mut it = values.iter().copied();
        for p in self.params_mut() {
            for v in p.iter_mut() {
                *v = it.next().expect("parameter vector length");
            }
        }
    }
}
