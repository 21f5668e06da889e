//! Fitting a UQ approximation (vanilla, MC-dropout or ensemble) and turning
//! its weight samples into metrics and per-instance uncertainty records.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::curation::UncertaintyRecord;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::metrics::{classification_report, EvalReport};
use crate::model::{hetero_raw_outputs, train_model, Ensemble, Head, MlpModel, ModelConfig, WeightSamples};
use crate::nn::Matrix;
use crate::rng::{derive_seed, label, RngStream};
use crate::uq::{self, PredictiveSample, UqSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum UqMethod {
    Vanilla,
    McDropout,
    Ensemble,
}

impl UqMethod {
    pub const ALL: [UqMethod; 3] = [UqMethod::Vanilla, UqMethod::McDropout, UqMethod::Ensemble];
}

impl fmt::Display for UqMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UqMethod::Vanilla => "vanilla",
            UqMethod::McDropout => "mc-dropout",
            UqMethod::Ensemble => "ensemble",
        })
    }
}

impl FromStr for UqMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vanilla" => Ok(UqMethod::Vanilla),
            "mc-dropout" | "mc_dropout" | "mcdropout" => Ok(UqMethod::McDropout),
            "ensemble" => Ok(UqMethod::Ensemble),
            other => Err(Error::Config(format!(
                "unknown UQ method `{other}` (expected vanilla|mc-dropout|ensemble)"
            ))),
        }
    }
}

/// Which pair of scalars plays (epistemic, aleatoric).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UncertaintySource {
    /// `Hetero` for Gaussian-logit heads, `Entropy` otherwise.
    Auto,
    /// (mutual information, expected entropy).
    Entropy,
    /// (H_epi, H_ale) from the raw μ/σ head outputs.
    Hetero,
}

impl FromStr for UncertaintySource {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(UncertaintySource::Auto),
            "entropy" | "mi" => Ok(UncertaintySource::Entropy),
            "hetero" => Ok(UncertaintySource::Hetero),
            other => Err(Error::Config(format!("unknown uncertainty source `{other}` (expected auto|entropy|hetero)"))),
        }
    }
}

impl fmt::Display for UncertaintySource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UncertaintySource::Auto => "auto",
            UncertaintySource::Entropy => "entropy",
            UncertaintySource::Hetero => "hetero",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UqSetup {
    pub method: UqMethod,
    pub model: ModelConfig,
    pub ensemble_size: usize,
    pub mc_passes: usize,
}

/// Seed of the `k`-th network trained under `seed`.
pub fn member_seed(seed: u64, k: usize) -> u64 {
    derive_seed(seed, label("member") ^ k as u64)
}

impl UqSetup {
    pub fn new(method: UqMethod, model: ModelConfig) -> Self {
        Self {
            method,
            model,
            ensemble_size: 5,
            mc_passes: 30,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.ensemble_size == 0 || self.mc_passes == 0 {
            return Err(Error::Config("ensemble_size and mc_passes must be >= 1".into()));
        }
        Ok(())
    }

    /// Trains the networks this method needs. Single-network methods train
    /// exactly the first member an ensemble with the same seed would train.
    pub fn fit(&self, train: &Dataset, val: &Dataset, seed: u64) -> Result<FittedUq> {
        self.validate()?;
        Ok(match self.method {
            UqMethod::Vanilla => FittedUq::Single {
                model: train_model(&self.model, train, val, member_seed(seed, 0))?,
                passes: 1,
            },
            UqMethod::McDropout => FittedUq::Single {
                model: train_model(&self.model, train, val, member_seed(seed, 0))?,
                passes: self.mc_passes,
            },
            UqMethod::Ensemble => {
                let seeds: Vec<u64> = (0..self.ensemble_size).map(|k| member_seed(seed, k)).collect();
                FittedUq::Ensemble(Ensemble::train(&self.model, train, val, &seeds)?)
            }
        })
    }
}

#[derive(Debug, Clone)]
pub enum FittedUq {
    Single { model: MlpModel, passes: usize },
    Ensemble(Ensemble),
}

impl FittedUq {
    pub fn weight_samples(&self) -> WeightSamples<'_> {
        match self {
            FittedUq::Single { model, passes } => WeightSamples::Dropout { model, passes: *passes },
            FittedUq::Ensemble(e) => WeightSamples::Ensemble(e),
        }
    }

    pub fn head(&self) -> Head {
        match self {
            FittedUq::Single { model, .. } => model.head(),
            FittedUq::Ensemble(e) => e.config().head,
        }
    }

    fn s_logit(&self) -> usize {
        match self {
            FittedUq::Single { model, .. } => model.config().s_logit,
            FittedUq::Ensemble(e) => e.config().s_logit,
        }
    }

    pub fn samples(&self, x: &Matrix, rng: &mut RngStream) -> Result<Vec<Vec<PredictiveSample>>> {
        self.weight_samples().predict(x, rng)
    }

    /// Mean predictive distribution per instance.
    pub fn mean_probs(&self, x: &Matrix, rng: &mut RngStream) -> Result<Vec<[f64; 2]>> {
        self.samples(x, rng)?
            .iter()
            .map(|s| uq::mean_predictive(s))
            .collect()
    }

    pub fn evaluate(&self, ds: &Dataset, rng: &mut RngStream) -> Result<EvalReport> {
        let probs = self.mean_probs(&ds.features(), rng)?;
        classification_report(&probs, &ds.labels())
    }

    /// Full uncertainty summaries; the heteroscedastic entropies are attached
    /// when the head is Gaussian and at least two weight samples exist.
    pub fn summaries(&self, x: &Matrix, rng: &mut RngStream) -> Result<Vec<UqSummary>> {
        let samples = self.samples(x, rng)?;
        let mut out: Vec<UqSummary> = samples.iter().map(|s| uq::summarize(s)).collect::<Result<_>>()?;
        let t = samples.first().map_or(0, Vec::len);
        if self.head() == Head::Heteroscedastic && t >= 2 {
            let raw = hetero_raw_outputs(self.weight_samples(), x, rng)?;
            for (summary, draws) in out.iter_mut().zip(raw) {
                summary.hetero = Some(uq::hetero_decompose(&draws.mu, &draws.sigma, self.s_logit(), rng)?);
            }
        }
        Ok(out)
    }

    /// Per-instance (epistemic, aleatoric) records for curation.
    pub fn records(&self, ds: &Dataset, source: UncertaintySource, rng: &mut RngStream) -> Result<Vec<UncertaintyRecord>> {
        let source = match source {
            UncertaintySource::Auto if self.head() == Head::Heteroscedastic => UncertaintySource::Hetero,
            UncertaintySource::Auto => UncertaintySource::Entropy,
            s => s,
        };
        let summaries = self.summaries(&ds.features(), rng)?;
        ds.instances()
            .iter()
            .zip(summaries)
            .map(|(inst, s)| {
                let (epistemic, aleatoric) = match source {
                    UncertaintySource::Hetero => {
                        let h = s.hetero.ok_or_else(|| {
                            Error::Config(
                                "heteroscedastic uncertainties need a Gaussian-logit head and at least 2 weight samples"
                                    .into(),
                            )
                        })?;
                        (h.h_epi, h.h_ale)
                    }
                    _ => (s.mutual_information, s.h_expected),
                };
                Ok(UncertaintyRecord {
                    id: inst.id.clone(),
                    epistemic,
                    aleatoric,
                    p_bar: s.p_bar,
                })
            })
            .collect()
    }
}
