//! The three weight-sampling schemes: a single network, MC-dropout passes and
//! ensemble members. Every predictor yields per-instance sample lists indexed
//! `[instance][sample]`.

use super::ensemble::Ensemble;
use super::mlp::{HeadOutput, MlpModel};
use crate::error::{Error, Result};
use crate::nn::loss::{sampled_softmax_mean, LogitNoise};
use crate::nn::{softmax, Matrix};
use crate::rng::RngStream;
use crate::uq::PredictiveSample;

/// Raw Gaussian-logit outputs of one instance across `T` weight samples.
#[derive(Debug, Clone, PartialEq)]
pub struct HeteroDraws {
    pub mu: Vec<[f64; 2]>,
    pub sigma: Vec<[f64; 2]>,
}

fn to_sample(p: &[f64]) -> PredictiveSample {
    // Renormalize away round-off from the Monte Carlo average.
    let s = p[0] + p[1];
    PredictiveSample {
        probs: [p[0] / s, p[1] / s],
    }
}

/// Predictive distributions for one head output.
fn output_probs(out: &HeadOutput, s_logit: usize, rng: &mut RngStream) -> Vec<PredictiveSample> {
    match out {
        HeadOutput::Logits(z) => softmax(z).row_iter().map(to_sample).collect(),
        HeadOutput::Gaussian { mu, sigma } => {
            let noise = LogitNoise::draw(mu.rows(), s_logit, 2, rng);
            (0..mu.rows())
                .map(|i| to_sample(&sampled_softmax_mean(mu.row(i), sigma.row(i), &noise, i)))
                .collect()
        }
    }
}

fn transpose(passes: Vec<Vec<PredictiveSample>>, n: usize) -> Vec<Vec<PredictiveSample>> {
    let mut per_instance = vec![Vec::with_capacity(passes.len()); n];
    for pass in passes {
        for (i, s) in pass.into_iter().enumerate() {
            per_instance[i].push(s);
        }
    }
    per_instance
}

/// Single eval-mode prediction per instance. Gaussian-logit heads are averaged
/// over `s_logit` sampled logits.
pub fn predict_vanilla(model: &MlpModel, x: &Matrix, rng: &mut RngStream) -> Result<Vec<PredictiveSample>> {
    model.require_trained()?;
    let out = model.infer(x, false, rng)?;
    Ok(output_probs(&out, model.config().s_logit, rng))
}

/// `passes` stochastic forward passes with dropout masks active.
pub fn predict_mc_dropout(
    model: &MlpModel,
    x: &Matrix,
    passes: usize,
    rng: &mut RngStream,
) -> Result<Vec<Vec<PredictiveSample>>> {
    model.require_trained()?;
    if passes == 0 {
        return Err(Error::Config("MC-dropout needs at least one pass".into()));
    }
    if model.config().dropout == 0.0 {
        log::warn!("MC-dropout with dropout probability 0: all {passes} passes are identical");
    }
    let mut all = Vec::with_capacity(passes);
    for _ in 0..passes {
        let out = model.infer(x, true, rng)?;
        all.push(output_probs(&out, model.config().s_logit, rng));
    }
    Ok(transpose(all, x.rows()))
}

/// One eval-mode sample per ensemble member, in member order.
pub fn predict_ensemble(ensemble: &Ensemble, x: &Matrix, rng: &mut RngStream) -> Result<Vec<Vec<PredictiveSample>>> {
    let mut all = Vec::with_capacity(ensemble.len());
    for member in ensemble.members() {
        all.push(predict_vanilla(member, x, rng)?);
    }
    Ok(transpose(all, x.rows()))
}

/// Where weight samples come from.
#[derive(Debug, Clone, Copy)]
pub enum WeightSamples<'a> {
    /// One network; `passes > 1` means MC-dropout, `passes == 1` one eval pass.
    Dropout { model: &'a MlpModel, passes: usize },
    Ensemble(&'a Ensemble),
}

impl WeightSamples<'_> {
    pub fn predict(&self, x: &Matrix, rng: &mut RngStream) -> Result<Vec<Vec<PredictiveSample>>> {
        match *self {
            WeightSamples::Dropout { model, passes: 1 } => {
                Ok(predict_vanilla(model, x, rng)?.into_iter().map(|s| vec![s]).collect())
            }
            WeightSamples::Dropout { model, passes } => predict_mc_dropout(model, x, passes, rng),
            WeightSamples::Ensemble(e) => predict_ensemble(e, x, rng),
        }
    }
}

/// Raw `(μ_t, σ_t)` head outputs per weight sample.
pub fn hetero_raw_outputs(source: WeightSamples<'_>, x: &Matrix, rng: &mut RngStream) -> Result<Vec<HeteroDraws>> {
    let passes: Vec<(Matrix, Matrix)> = match source {
        WeightSamples::Dropout { model, passes } => {
            model.require_trained()?;
            if passes == 0 {
                return Err(Error::Config("at least one pass is required".into()));
            }
            let mut v = Vec::with_capacity(passes);
            for _ in 0..passes {
                v.push(gaussian(model.infer(x, passes > 1, rng)?)?);
            }
            v
        }
        WeightSamples::Ensemble(e) => {
            let mut v = Vec::with_capacity(e.len());
            for m in e.members() {
                m.require_trained()?;
                v.push(gaussian(m.infer(x, false, rng)?)?);
            }
            v
        }
    };
    Ok((0..x.rows())
        .map(|i| HeteroDraws {
            mu: passes.iter().map(|(m, _)| [m.get(i, 0), m.get(i, 1)]).collect(),
            sigma: passes.iter().map(|(_, s)| [s.get(i, 0), s.get(i, 1)]).collect(),
        })
        .collect())
}

fn gaussian(out: HeadOutput) -> Result<(Matrix, Matrix)> {
    match out {
        HeadOutput::Gaussian { mu, sigma } => Ok((mu, sigma)),
        HeadOutput::Logits(_) => Err(Error::HeadType),
    }
}
