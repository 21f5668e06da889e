use serde::{Deserialize, Serialize};

use super::{Dataset, Instance};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Two Gaussian clusters with a tagged corrupted subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_instances: usize,
    pub feature_dim: usize,
    /// Distance between class means, in units of the unit within-class std.
    pub separation: f64,
    /// Negatives per positive.
    pub imbalance: f64,
    /// Share of instances that receive corruption and carry `noise_tag = true`.
    pub noisy_fraction: f64,
    /// Label flip probability inside the corrupted subset.
    pub flip_probability: f64,
    /// Std of the extra per-coordinate feature noise in the corrupted subset.
    pub noise_scale: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_instances: 2000,
            feature_dim: 20,
            separation: 2.0,
            imbalance: 4.0,
            noisy_fraction: 0.3,
            flip_probability: 0.5,
            noise_scale: 2.0,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Argument(m));
        if self.n_instances < 2 {
            return bad(format!("n_instances must be >= 2, got {}", self.n_instances));
        }
        if self.feature_dim == 0 {
            return bad("feature_dim must be >= 1".into());
        }
        if !(self.separation >= 0.0) {
            return bad(format!("separation must be >= 0, got {}", self.separation));
        }
        if !(self.imbalance > 0.0) || !self.imbalance.is_finite() {
            return bad(format!("imbalance must be > 0, got {}", self.imbalance));
        }
        if !(0.0..=1.0).contains(&self.noisy_fraction) {
            return bad(format!("noisy_fraction must lie in [0, 1], got {}", self.noisy_fraction));
        }
        if !(0.0..=1.0).contains(&self.flip_probability) {
            return bad(format!("flip_probability must lie in [0, 1], got {}", self.flip_probability));
        }
        if !(self.noise_scale >= 0.0) {
            return bad(format!("noise_scale must be >= 0, got {}", self.noise_scale));
        }
        Ok(())
    }

    pub fn positives(&self) -> usize {
        ((self.n_instances as f64 / (1.0 + self.imbalance)).round() as usize).clamp(1, self.n_instances - 1)
    }

    pub fn noisy_count(&self) -> usize {
        (self.noisy_fraction * self.n_instances as f64).floor() as usize
    }
}

/// Class means sit at `±separation/2` along a random unit direction.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = RngStream::new(spec.seed);
    let d = spec.feature_dim;

    let mut direction: Vec<f64> = (0..d).map(|_| rng.standard_normal()).collect();
    let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    direction.iter_mut().for_each(|v| *v /= norm);

    let n = spec.n_instances;
    let mut labels: Vec<u8> = (0..n).map(|i| u8::from(i < spec.positives())).collect();
    rng.shuffle(&mut labels);

    let mut noisy = vec![false; n];
    for i in rng.sample_indices(n, spec.noisy_count()) {
        noisy[i] = true;
    }

    let half = spec.separation / 2.0;
    let instances = (0..n)
        .map(|i| {
            let sign = if labels[i] == 1 { 1.0 } else { -1.0 };
            let mut features: Vec<f64> = direction
                .iter()
                .map(|u| sign * half * u + rng.standard_normal())
                .collect();
            let mut label = labels[i];
            if noisy[i] {
                for v in &mut features {
                    *v += spec.noise_scale * rng.standard_normal();
                }
                if rng.bernoulli(spec.flip_probability) {
                    label = 1 - label;
                }
            }
            Instance {
                id: format!("syn-{i:06}"),
                features,
                label,
                noise_tag: Some(noisy[i]),
            }
        })
        .collect();
    Dataset::new(instances, format!("synthetic(seed={})", spec.seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wide_separation_is_linearly_separable() {
        let spec = SyntheticSpec {
            n_instances: 1000,
            separation: 10.0,
            noisy_fraction: 0.0,
            ..SyntheticSpec::default()
        };
        let ds = generate_synthetic(&spec).unwrap();
        // Recover the discriminant direction from class means, then threshold at the midpoint.
        let d = ds.feature_dim();
        let mut means = [vec![0.0; d], vec![0.0; d]];
        let counts = ds.class_counts();
        for inst in ds.instances() {
            for (m, v) in means[inst.label as usize].iter_mut().zip(&inst.features) {
                *m += v / counts[inst.label as usize] as f64;
            }
        }
        let w: Vec<f64> = means[1].iter().zip(&means[0]).map(|(a, b)| a - b).collect();
        let mid: Vec<f64> = means[1].iter().zip(&means[0]).map(|(a, b)| (a + b) / 2.0).collect();
        let correct = ds
            .instances()
            .iter()
            .filter(|inst| {
                let score: f64 = inst.features.iter().zip(&mid).zip(&w).map(|((x, m), w)| (x - m) * w).sum();
                (score > 0.0) == (inst.label == 1)
            })
            .count();
        assert!(correct as f64 / ds.len() as f64 >= 0.99);
    }

    #[test]
    fn tagged_count_and_determinism() {
        let spec = SyntheticSpec {
            n_instances: 333,
            ..SyntheticSpec::default()
        };
        let a = generate_synthetic(&spec).unwrap();
        assert_eq!(a.noisy_count(), (0.3f64 * 333.0).floor() as usize);
        let b = generate_synthetic(&spec).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic(&SyntheticSpec { seed: 1, ..spec }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn invalid_fractions_are_rejected() {
        for spec in [
            SyntheticSpec { noisy_fraction: 1.5, ..SyntheticSpec::default() },
            SyntheticSpec { flip_probability: -0.1, ..SyntheticSpec::default() },
            SyntheticSpec { imbalance: 0.0, ..SyntheticSpec::default() },
        ] {
            assert!(matches!(generate_synthetic(&spec), Err(Error::Argument(_))));
        }
    }

    #[test]
    fn default_profile_imbalance() {
        let ds = generate_synthetic(&SyntheticSpec::default()).unwrap();
        assert_eq!(ds.len(), 2000);
        assert_eq!(ds.noisy_count(), 600);
        let clean_pos = ds.instances().iter().filter(|i| !i.is_noisy() && i.label == 1).count();
        let clean = ds.len() - ds.noisy_count();
        let share = clean_pos as f64 / clean as f64;
        assert!((0.15..0.25).contains(&share), "{share}");
    }
}
