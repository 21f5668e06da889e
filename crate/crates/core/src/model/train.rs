use super::config::ModelConfig;
use super::mlp::{EpochRecord, HeadOutput, MlpModel, Mode};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::nn::loss::LogitNoise;
use crate::nn::{cross_entropy_loss, softmax, stochastic_nll_with_noise, AdamState, Matrix};
use crate::rng::RngStream;

/// Patience-based early stopping on validation loss.
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    patience: usize,
    best: f64,
    best_epoch: Option<usize>,
    stale: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    /// New best: snapshot the weights.
    Improved,
    Continue,
    Stop,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        Self {
            patience,
            best: f64::INFINITY,
            best_epoch: None,
            stale: 0,
        }
    }

    pub fn observe(&mut self, epoch: usize, val_loss: f64) -> StopDecision {
        if val_loss < self.best {
            self.best = val_loss;
            self.best_epoch = Some(epoch);
            self.stale = 0;
            StopDecision::Improved
        } else {
            self.stale += 1;
            if self.stale >= self.patience {
                StopDecision::Stop
            } else {
                StopDecision::Continue
            }
        }
    }

    pub fn best(&self) -> Option<(usize, f64)> {
        self.best_epoch.map(|e| (e, self.best))
    }
}

/// Loss and head-output gradients for one batch.
pub(crate) fn batch_loss(
    output: &HeadOutput,
    labels: &[usize],
    noise: Option<&LogitNoise>,
) -> Result<(f64, Matrix, Option<Matrix>)> {
    match output {
        HeadOutput::Logits(z) => {
            let out = cross_entropy_loss(&softmax(z), labels)?;
            Ok((out.loss, out.grad, None))
        }
        HeadOutput::Gaussian { mu, sigma } => {
            let noise = noise.ok_or(Error::HeadType)?;
            let out = stochastic_nll_with_noise(mu, sigma, labels, noise)?;
            Ok((out.loss, out.grad_mu, Some(out.grad_sigma)))
        }
    }
}

impl MlpModel {
    /// Mean validation loss in eval mode. Gaussian-logit noise comes from a
    /// fresh stream seeded with `noise_seed`, so repeated calls see the same draws.
    pub fn validation_loss(&self, x: &Matrix, labels: &[usize], noise_seed: u64) -> Result<f64> {
        let mut rng = RngStream::new(noise_seed);
        let out = self.infer(x, false, &mut rng)?;
        let noise = match &out {
            HeadOutput::Gaussian { .. } => Some(LogitNoise::draw(x.rows(), self.config.s_logit, 2, &mut rng)),
            HeadOutput::Logits(_) => None,
        };
        Ok(batch_loss(&out, labels, noise.as_ref())?.0)
    }

    /// Trains with Adam and early stopping, then restores the checkpoint with
    /// the lowest validation loss.
    pub fn fit(&mut self, train: &Dataset, val: &Dataset, rng: &mut RngStream) -> Result<()> {
        if train.is_empty() || val.is_empty() {
            return Err(Error::Config("training and validation sets must be nonempty".into()));
        }
        for (name, ds) in [("training", train), ("validation", val)] {
            if ds.feature_dim() != self.config.input_dim {
                return Err(Error::Config(format!(
                    "{name} features have dimension {}, model expects {}",
                    ds.feature_dim(),
                    self.config.input_dim
                )));
            }
        }
        let cfg = self.config.clone();
        let x = train.features();
        let y = train.labels();
        let x_val = val.features();
        let y_val = val.labels();

        let mut shuffle_rng = rng.fork();
        let mut dropout_rng = rng.fork();
        let mut noise_rng = rng.fork();
        let val_seed = rng.fork().seed();

        let mut adam = AdamState::new(cfg.adam, &self.param_sizes());
        let mut stopper = EarlyStopping::new(cfg.patience);
        let mut best_params = self.param_vector();
        self.history.clear();

        let mut order: Vec<usize> = (0..x.rows()).collect();
        for epoch in 1..=cfg.max_epochs {
            shuffle_rng.shuffle(&mut order);
            let mut total = 0.0;
            for batch in order.chunks(cfg.batch_size) {
                let xb = x.select_rows(batch);
                let yb: Vec<usize> = batch.iter().map(|&i| y[i]).collect();
                let out = self.forward(&xb, Mode::Train, &mut dropout_rng)?;
                let noise = match &out {
                    HeadOutput::Gaussian { .. } => {
                        Some(LogitNoise::draw(batch.len(), cfg.s_logit, 2, &mut noise_rng))
                    }
                    HeadOutput::Logits(_) => None,
                };
                let (loss, g_mu, g_sigma) = batch_loss(&out, &yb, noise.as_ref())?;
                if !loss.is_finite() {
                    return Err(Error::Divergence {
                        epoch,
                        detail: format!("non-finite training loss {loss}"),
                    });
                }
                total += loss * batch.len() as f64;
                let grads = self.backward(&g_mu, g_sigma.as_ref())?;
                let grad_refs: Vec<&[f64]> = grads.iter().map(Vec::as_slice).collect();
                adam.step(&mut self.params_mut(), &grad_refs)?;
            }
            let train_loss = total / x.rows() as f64;
            let val_loss = self.validation_loss(&x_val, &y_val, val_seed)?;
            if !val_loss.is_finite() || self.param_vector().iter().any(|p| !p.is_finite()) {
                return Err(Error::Divergence {
                    epoch,
                    detail: format!("non-finite validation loss {val_loss}"),
                });
            }
            self.history.push(EpochRecord {
                epoch,
                train_loss,
                val_loss,
            });
            match stopper.observe(epoch, val_loss) {
                StopDecision::Improved => best_params = self.param_vector(),
                StopDecision::Continue => {}
                StopDecision::Stop => break,
            }
        }
        self.load_param_vector(&best_params);
        self.trained = true;
        Ok(())
    }
}

/// Initializes a model from `seed` and trains it.
pub fn train_model(config: &ModelConfig, train: &Dataset, val: &Dataset, seed: u64) -> Result<MlpModel> {
    let mut rng = RngStream::new(seed);
    let mut init_rng = rng.fork();
    let mut model = MlpModel::new(config.clone(), &mut init_rng)?;
    model.fit(train, val, &mut rng)?;
    Ok(model)
}
