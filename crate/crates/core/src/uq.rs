//! Uncertainty decomposition over weight samples.
//!
//! Inputs are the per-instance predictive distributions produced by `T` weight
//! samples (MC-dropout passes or ensemble members), or the raw Gaussian-logit
//! head outputs of a heteroscedastic model. All entropies are in nats.
//!
//! Every estimator first puts its samples into a canonical order, so results
//! are bit-identical under any permutation of the input.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::loss::{sampled_softmax_mean, LogitNoise};
use crate::rng::RngStream;

/// Binary predictive distribution `[P(y=0), P(y=1)]` from one weight sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictiveSample {
    pub probs: [f64; 2],
}

impl PredictiveSample {
    pub fn new(probs: [f64; 2]) -> Result<Self> {
        let ok = probs.iter().all(|p| *p >= 0.0 && p.is_finite()) && (probs[0] + probs[1] - 1.0).abs() <= 1e-9;
        if ok {
            Ok(Self { probs })
        } else {
            Err(Error::Domain(format!("{probs:?} is not a probability distribution")))
        }
    }

    /// Probability of the positive class.
    pub fn positive(&self) -> f64 {
        self.probs[1]
    }
}

/// Aggregate uncertainty for one instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UqSummary {
    pub p_bar: [f64; 2],
    /// Entropy of the mean prediction (total uncertainty).
    pub h_total: f64,
    /// Mean per-sample entropy (aleatoric measure).
    pub h_expected: f64,
    /// `h_total - h_expected` (epistemic measure).
    pub mutual_information: f64,
    pub var_total: f64,
    pub var_epistemic: f64,
    pub var_aleatoric: f64,
    /// Present when the summary came from Gaussian-logit head outputs.
    pub hetero: Option<HeteroUncertainty>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceDecomposition {
    pub total: f64,
    pub epistemic: f64,
    pub aleatoric: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeteroUncertainty {
    pub h_ale: f64,
    pub h_epi: f64,
    pub p_ale: [f64; 2],
    pub p_epi: [f64; 2],
}

fn require_nonempty<T>(items: &[T]) -> Result<()> {
    if items.is_empty() {
        Err(Error::Argument("at least one sample is required".into()))
    } else {
        Ok(())
    }
}

fn canonical(samples: &[PredictiveSample]) -> Vec<[f64; 2]> {
    let mut v: Vec<[f64; 2]> = samples.iter().map(|s| s.probs).collect();
    v.sort_by(|a, b| a[1].total_cmp(&b[1]).then(a[0].total_cmp(&b[0])));
    v
}

/// `-Σ p log p` with `0·log 0 = 0`.
pub fn predictive_entropy(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * v.ln())
        .sum::<f64>()
}

/// Arithmetic mean of the sample distributions.
pub fn mean_predictive(samples: &[PredictiveSample]) -> Result<[f64; 2]> {
    require_nonempty(samples)?;
    let sorted = canonical(samples);
    let t = sorted.len() as f64;
    let mut sum = [0.0; 2];
    for p in &sorted {
        sum[0] += p[0];
        sum[1] += p[1];
    }
    Ok([sum[0] / t, sum[1] / t])
}

/// Mean per-sample entropy.
pub fn expected_entropy(samples: &[PredictiveSample]) -> Result<f64> {
    require_nonempty(samples)?;
    let sorted = canonical(samples);
    let sum: f64 = sorted.iter().map(|p| predictive_entropy(p)).sum();
    Ok(sum / sorted.len() as f64)
}

/// Entropy of the mean minus mean entropy; tiny negative round-off is clamped to zero.
pub fn mutual_information(samples: &[PredictiveSample]) -> Result<f64> {
    let h_total = predictive_entropy(&mean_predictive(samples)?);
    let mi = h_total - expected_entropy(samples)?;
    Ok(if (-1e-9..0.0).contains(&mi) { 0.0 } else { mi })
}

/// Law-of-total-variance split of the Bernoulli outcome variance.
///
/// With `p_t = P(y=1)` per sample: aleatoric is the mean Bernoulli variance
/// `p_t(1-p_t)`, epistemic is the population variance of `{p_t}`.
pub fn total_variance_decompose(samples: &[PredictiveSample]) -> Result<VarianceDecomposition> {
    require_nonempty(samples)?;
    let sorted = canonical(samples);
    let t = sorted.len() as f64;
    let mean = sorted.iter().map(|p| p[1]).sum::<f64>() / t;
    let epistemic = sorted.iter().map(|p| (p[1] - mean).powi(2)).sum::<f64>() / t;
    let aleatoric = sorted.iter().map(|p| p[1] * (1.0 - p[1])).sum::<f64>() / t;
    Ok(VarianceDecomposition {
        total: epistemic + aleatoric,
        epistemic,
        aleatoric,
    })
}

pub fn summarize(samples: &[PredictiveSample]) -> Result<UqSummary> {
    let p_bar = mean_predictive(samples)?;
    let h_total = predictive_entropy(&p_bar);
    let h_expected = expected_entropy(samples)?;
    let mutual_information = mutual_information(samples)?;
    let var = total_variance_decompose(samples)?;
    Ok(UqSummary {
        p_bar,
        h_total,
        h_expected,
        mutual_information,
        var_total: var.total,
        var_epistemic: var.epistemic,
        var_aleatoric: var.aleatoric,
        hetero: None,
    })
}

/// Entropies of the aleatoric and epistemic predictive distributions of a
/// Gaussian-logit model.
///
/// `p_ale` averages `softmax(μ̄ + σ̄⊙ε)` where `σ̄²` is the mean head variance;
/// `p_epi` averages `softmax(μ̄ + s⊙ε)` where `s²` is the population variance
/// of the sampled means. Both use the same `s_logit` standard-normal draws.
pub fn hetero_decompose(
    mu: &[[f64; 2]],
    sigma: &[[f64; 2]],
    s_logit: usize,
    rng: &mut RngStream,
) -> Result<HeteroUncertainty> {
    if mu.len() != sigma.len() {
        return Err(Error::dim("hetero_decompose", mu.len(), sigma.len()));
    }
    if mu.len() < 2 {
        return Err(Error::Argument(format!(
            "epistemic decomposition needs at least 2 weight samples, got {}",
            mu.len()
        )));
    }
    if s_logit == 0 {
        return Err(Error::Argument("S_logit must be at least 1".into()));
    }
    if sigma.iter().flatten().any(|s| !(*s > 0.0)) {
        return Err(Error::Domain("sigma must be positive".into()));
    }

    let mut pairs: Vec<([f64; 2], [f64; 2])> = mu.iter().copied().zip(sigma.iter().copied()).collect();
    pairs.sort_by(|a, b| {
        a.0[0]
            .total_cmp(&b.0[0])
            .then(a.0[1].total_cmp(&b.0[1]))
            .then(a.1[0].total_cmp(&b.1[0]))
            .then(a.1[1].total_cmp(&b.1[1]))
    });
    let t = pairs.len() as f64;
    let mut mu_bar = [0.0; 2];
    let mut sigma_sq = [0.0; 2];
    for (m, s) in &pairs {
        for c in 0..2 {
            mu_bar[c] += m[c];
            sigma_sq[c] += s[c] * s[c];
        }
    }
    for c in 0..2 {
        mu_bar[c] /= t;
        sigma_sq[c] /= t;
    }
    let mut spread_sq = [0.0; 2];
    for (m, _) in &pairs {
        for c in 0..2 {
            spread_sq[c] += (m[c] - mu_bar[c]).powi(2);
        }
    }
    let sigma_bar = [sigma_sq[0].sqrt(), sigma_sq[1].sqrt()];
    let spread = [(spread_sq[0] / t).sqrt(), (spread_sq[1] / t).sqrt()];

    let noise = LogitNoise::draw(1, s_logit, 2, rng);
    let p_ale = sampled_softmax_mean(&mu_bar, &sigma_bar, &noise, 0);
    let p_epi = sampled_softmax_mean(&mu_bar, &spread, &noise, 0);
    let p_ale = [p_ale[0], p_ale[1]];
    let p_epi = [p_epi[0], p_epi[1]];
    Ok(HeteroUncertainty {
        h_ale: predictive_entropy(&p_ale),
        h_epi: predictive_entropy(&p_epi),
        p_ale,
        p_epi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn s(p1: f64) -> PredictiveSample {
        PredictiveSample::new([1.0 - p1, p1]).unwrap()
    }

    #[test]
    fn mean_predictive_examples() {
        assert_eq!(mean_predictive(&[s(0.0), s(1.0)]).unwrap(), [0.5, 0.5]);
        assert_eq!(mean_predictive(&[s(0.3)]).unwrap(), s(0.3).probs);
        assert!(mean_predictive(&[]).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert!((predictive_entropy(&[0.5, 0.5]) - LN_2).abs() < 1e-15);
        assert_eq!(predictive_entropy(&[1.0, 0.0]), 0.0);
        assert!((predictive_entropy(&[0.9, 0.1]) - 0.325083).abs() < 1e-6);
    }

    #[test]
    fn expected_entropy_and_mi_examples() {
        assert!((expected_entropy(&[s(0.5), s(0.5)]).unwrap() - LN_2).abs() < 1e-15);
        assert_eq!(expected_entropy(&[s(0.0), s(1.0)]).unwrap(), 0.0);
        assert_eq!(mutual_information(&[s(0.3); 4]).unwrap(), 0.0);
        assert!((mutual_information(&[s(0.0), s(1.0)]).unwrap() - LN_2).abs() < 1e-15);
        assert!(expected_entropy(&[]).is_err());
        assert!(mutual_information(&[]).is_err());
    }

    #[test]
    fn variance_examples() {
        let v = total_variance_decompose(&[s(0.5); 3]).unwrap();
        assert_eq!((v.total, v.epistemic, v.aleatoric), (0.25, 0.0, 0.25));
        let v = total_variance_decompose(&[s(0.0), s(1.0), s(0.0), s(1.0)]).unwrap();
        assert_eq!((v.total, v.epistemic, v.aleatoric), (0.25, 0.25, 0.0));
        assert!(total_variance_decompose(&[]).is_err());
    }

    #[test]
    fn hetero_symmetric_means_give_ln2() {
        let mut rng = RngStream::new(1);
        let mu = [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0]];
        let sigma = [[0.5, 2.0], [1.0, 0.3], [3.0, 3.0]];
        let h = hetero_decompose(&mu, &sigma, 1000, &mut rng).unwrap();
        assert_eq!(h.p_epi, [0.5, 0.5]);
        assert!((h.h_epi - LN_2).abs() < 1e-12);
        // p_ale has σ̄ differing per class, so only symmetric in expectation.
        assert!((h.h_ale - LN_2).abs() < 1e-2);
    }

    #[test]
    fn hetero_degenerate_noise() {
        let mut rng = RngStream::new(2);
        let mu = [[1.3, 0.2]; 4];
        let sigma = [[1e-9, 1e-9]; 4];
        let h = hetero_decompose(&mu, &sigma, 200, &mut rng).unwrap();
        let mut p = [0.0; 2];
        crate::nn::activation::softmax_into(&mu[0], &mut p);
        assert!((h.h_ale - predictive_entropy(&p)).abs() < 1e-6);
        // Zero spread of the sampled means adds no entropy beyond softmax(μ̄).
        assert!((h.h_epi - predictive_entropy(&p)).abs() < 1e-12);
    }

    #[test]
    fn hetero_needs_two_samples() {
        let mut rng = RngStream::new(0);
        assert!(matches!(
            hetero_decompose(&[[0.0, 1.0]], &[[1.0, 1.0]], 10, &mut rng),
            Err(Error::Argument(_))
        ));
    }
}
