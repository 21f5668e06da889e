//! Training losses for the two head types.

use super::activation::{log_sum_exp, softmax_into};
use super::Matrix;
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Floor applied to probabilities before taking a logarithm.
pub const LOG_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct LossOutput {
    pub loss: f64,
    /// Gradient wrt the logits.
    pub grad: Matrix,
}

#[derive(Debug, Clone)]
pub struct HeteroLossOutput {
    pub loss: f64,
    pub grad_mu: Matrix,
    pub grad_sigma: Matrix,
}

fn check_labels(rows: usize, cols: usize, labels: &[usize]) -> Result<()> {
    if labels.len() != rows {
        return Err(Error::dim("loss labels", rows, labels.len()));
    }
    if let Some(&bad) = labels.iter().find(|&&y| y >= cols) {
        return Err(Error::Argument(format!("label {bad} out of range for {cols} classes")));
    }
    Ok(())
}

/// Mean negative log-likelihood of softmax probabilities.
///
/// `probs` must be `softmax(z)`; the returned gradient is wrt `z`.
pub fn cross_entropy_loss(probs: &Matrix, labels: &[usize]) -> Result<LossOutput> {
    check_labels(probs.rows(), probs.cols(), labels)?;
    let n = probs.rows() as f64;
    let mut loss = 0.0;
    let mut grad = probs.clone();
    for (i, &y) in labels.iter().enumerate() {
        loss -= probs.get(i, y).max(LOG_FLOOR).ln();
        grad.row_mut(i)[y] -= 1.0;
    }
    for g in grad.data_mut() {
        *g /= n;
    }
    Ok(LossOutput { loss: loss / n, grad })
}

/// Standard-normal draws used to sample logits, laid out `[instance][sample][class]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitNoise {
    instances: usize,
    samples: usize,
    classes: usize,
    data: Vec<f64>,
}

impl LogitNoise {
    pub fn draw(instances: usize, samples: usize, classes: usize, rng: &mut RngStream) -> Self {
        let data = (0..instances * samples * classes)
            .map(|_| rng.standard_normal())
            .collect();
        Self {
            instances,
            samples,
            classes,
            data,
        }
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn eps(&self, instance: usize, sample: usize) -> &[f64] {
        let start = (instance * self.samples + sample) * self.classes;
        &self.data[start..start + self.classes]
    }
}

/// Monte Carlo estimate of `E_ε[softmax(μ + σ⊙ε)]` for one instance.
pub fn sampled_softmax_mean(mu: &[f64], sigma: &[f64], noise: &LogitNoise, instance: usize) -> Vec<f64> {
    let k = mu.len();
    let mut mean = vec![0.0; k];
    let mut z = vec![0.0; k];
    let mut p = vec![0.0; k];
    for s in 0..noise.samples {
        let eps = noise.eps(instance, s);
        for c in 0..k {
            z[c] = mu[c] + sigma[c] * eps[c];
        }
        softmax_into(&z, &mut p);
        for c in 0..k {
            mean[c] += p[c];
        }
    }
    let t = noise.samples as f64;
    mean.iter_mut().for_each(|v| *v /= t);
    mean
}

/// Heteroscedastic classification loss with Gaussian logits.
///
/// Per instance the loss is `-log( (1/S) Σ_s softmax(μ + σ⊙ε_s)[y] )`, evaluated
/// in log space. Gradients flow through the reparameterized samples, so with
/// fixed `noise` the returned gradients are exact derivatives of the returned loss.
pub fn stochastic_nll_with_noise(
    mu: &Matrix,
    sigma: &Matrix,
    labels: &[usize],
    noise: &LogitNoise,
) -> Result<HeteroLossOutput> {
    if mu.shape() != sigma.shape() {
        return Err(Error::dim(
            "stochastic_nll sigma",
            format!("{:?}", mu.shape()),
            format!("{:?}", sigma.shape()),
        ));
    }
    check_labels(mu.rows(), mu.cols(), labels)?;
    if noise.instances != mu.rows() || noise.classes != mu.cols() || noise.samples == 0 {
        return Err(Error::dim(
            "stochastic_nll noise",
            format!("{}x?x{}", mu.rows(), mu.cols()),
            format!("{}x{}x{}", noise.instances, noise.samples, noise.classes),
        ));
    }
    if let Some(bad) = sigma.data().iter().find(|&&s| !(s > 0.0)) {
        return Err(Error::Domain(format!("sigma must be positive, got {bad}")));
    }

    let n = mu.rows();
    let k = mu.cols();
    let s_count = noise.samples;
    let log_s = (s_count as f64).ln();
    let log_floor = LOG_FLOOR.ln();

    let mut loss = 0.0;
    let mut grad_mu = Matrix::zeros(n, k);
    let mut grad_sigma = Matrix::zeros(n, k);
    let mut z = vec![0.0; k];
    let mut probs = vec![vec![0.0; k]; s_count];
    let mut log_q = vec![0.0; s_count];

    for (i, &y) in labels.iter().enumerate() {
        let m = mu.row(i);
        let sd = sigma.row(i);
        for s in 0..s_count {
            let eps = noise.eps(i, s);
            for c in 0..k {
                z[c] = m[c] + sd[c] * eps[c];
            }
            log_q[s] = z[y] - log_sum_exp(&z);
            softmax_into(&z, &mut probs[s]);
        }
        let log_mean = log_sum_exp(&log_q) - log_s;
        if log_mean < log_floor {
            loss -= log_floor;
            continue;
        }
        loss -= log_mean;

        // Weight of sample s in the mixture: q_s / Σ q.
        let lse = log_sum_exp(&log_q);
        let gm = grad_mu.row_mut(i);
        for s in 0..s_count {
            let w = (log_q[s] - lse).exp();
            for c in 0..k {
                let onehot = if c == y { 1.0 } else { 0.0 };
                gm[c] += w * (probs[s][c] - onehot);
            }
        }
        let gs = grad_sigma.row_mut(i);
        for s in 0..s_count {
            let w = (log_q[s] - lse).exp();
            let eps = noise.eps(i, s);
            for c in 0..k {
                let onehot = if c == y { 1.0 } else { 0.0 };
                gs[c] += w * (probs[s][c] - onehot) * eps[c];
            }
        }
    }

    let nf = n as f64;
    grad_mu.data_mut().iter_mut().for_each(|g| *g /= nf);
    grad_sigma.data_mut().iter_mut().for_each(|g| *g /= nf);
    Ok(HeteroLossOutput {
        loss: loss / nf,
        grad_mu,
        grad_sigma,
    })
}

/// [`stochastic_nll_with_noise`] with `s_logit` fresh draws per instance from `rng`.
pub fn stochastic_nll_loss(
    mu: &Matrix,
    sigma: &Matrix,
    labels: &[usize],
    s_logit: usize,
    rng: &mut RngStream,
) -> Result<HeteroLossOutput> {
    if s_logit == 0 {
        return Err(Error::Argument("S_logit must be at least 1".into()));
    }
    let noise = LogitNoise::draw(mu.rows(), s_logit, mu.cols(), rng);
    stochastic_nll_with_noise(mu, sigma, labels, &noise)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::activation::softmax;

    fn ce_of_logits(z: &Matrix, labels: &[usize]) -> f64 {
        cross_entropy_loss(&softmax(z), labels).unwrap().loss
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
    }

    #[test]
    fn cross_entropy_fixed_values() {
        let perfect = cross_entropy_loss(&Matrix::from_rows(&[[1.0, 0.0]]).unwrap(), &[0]).unwrap();
        assert!(perfect.loss.abs() <= 1e-12);
        let half = cross_entropy_loss(&Matrix::from_rows(&[[0.5, 0.5]]).unwrap(), &[1]).unwrap();
        assert!((half.loss - std::f64::consts::LN_2).abs() < 1e-15);
        let zero = cross_entropy_loss(&Matrix::from_rows(&[[1.0, 0.0]]).unwrap(), &[1]).unwrap();
        assert!((zero.loss + LOG_FLOOR.ln()).abs() < 1e-9);
    }

    #[test]
    fn cross_entropy_gradient_matches_finite_differences() {
        let mut rng = RngStream::new(21);
        let z = Matrix::from_vec(6, 2, (0..12).map(|_| rng.uniform_range(-3.0, 3.0)).collect()).unwrap();
        let labels = [0, 1, 1, 0, 1, 0];
        let analytic = cross_entropy_loss(&softmax(&z), &labels).unwrap().grad;
        let h = 1e-5;
        for idx in 0..12 {
            let mut plus = z.clone();
            plus.data_mut()[idx] += h;
            let mut minus = z.clone();
            minus.data_mut()[idx] -= h;
            let fd = (ce_of_logits(&plus, &labels) - ce_of_logits(&minus, &labels)) / (2.0 * h);
            assert!(rel_err(analytic.data()[idx], fd) < 1e-4, "idx {idx}");
        }
    }

    #[test]
    fn stochastic_nll_degenerate_noise_is_cross_entropy() {
        let mu = Matrix::from_rows(&[[0.3, -1.2], [2.0, 0.5]]).unwrap();
        let sigma = Matrix::from_vec(2, 2, vec![1e-9; 4]).unwrap();
        let mut rng = RngStream::new(4);
        let out = stochastic_nll_loss(&mu, &sigma, &[1, 0], 50, &mut rng).unwrap();
        let ce = ce_of_logits(&mu, &[1, 0]);
        assert!((out.loss - ce).abs() < 1e-6);
    }

    #[test]
    fn stochastic_nll_symmetric_logits_give_ln2() {
        let mu = Matrix::zeros(3, 2);
        let sigma = Matrix::from_vec(3, 2, vec![0.7; 6]).unwrap();
        let mut rng = RngStream::new(8);
        let out = stochastic_nll_loss(&mu, &sigma, &[0, 1, 0], 20_000, &mut rng).unwrap();
        assert!((out.loss - std::f64::consts::LN_2).abs() < 5e-3, "{}", out.loss);
    }

    #[test]
    fn stochastic_nll_gradients_match_finite_differences() {
        let mut rng = RngStream::new(13);
        let (n, k, s) = (5, 2, 7);
        let mu = Matrix::from_vec(n, k, (0..n * k).map(|_| rng.uniform_range(-2.0, 2.0)).collect()).unwrap();
        let sigma = Matrix::from_vec(n, k, (0..n * k).map(|_| rng.uniform_range(0.1, 2.0)).collect()).unwrap();
        let labels = [1, 0, 0, 1, 1];
        let noise = LogitNoise::draw(n, s, k, &mut rng);
        let out = stochastic_nll_with_noise(&mu, &sigma, &labels, &noise).unwrap();
        let f = |m: &Matrix, sd: &Matrix| stochastic_nll_with_noise(m, sd, &labels, &noise).unwrap().loss;
        let h = 1e-5;
        for idx in 0..n * k {
            let (mut mp, mut mm) = (mu.clone(), mu.clone());
            mp.data_mut()[idx] += h;
            mm.data_mut()[idx] -= h;
            let fd = (f(&mp, &sigma) - f(&mm, &sigma)) / (2.0 * h);
            assert!(rel_err(out.grad_mu.data()[idx], fd) < 1e-4);

            let (mut sp, mut sm) = (sigma.clone(), sigma.clone());
            sp.data_mut()[idx] += h;
            sm.data_mut()[idx] -= h;
            let fd = (f(&mu, &sp) - f(&mu, &sm)) / (2.0 * h);
            assert!(rel_err(out.grad_sigma.data()[idx], fd) < 1e-4);
        }
    }

    #[test]
    fn nonpositive_sigma_is_domain_error() {
        let mu = Matrix::zeros(1, 2);
        let sigma = Matrix::from_rows(&[[0.0, 1.0]]).unwrap();
        let mut rng = RngStream::new(0);
        assert!(matches!(
            stochastic_nll_loss(&mu, &sigma, &[0], 5, &mut rng),
            Err(Error::Domain(_))
        ));
    }
}
