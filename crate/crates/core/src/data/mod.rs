//! Datasets, deterministic splitting, class balancing, quality-shift injection
//! and the synthetic pool generator.

mod csv_io;
mod dataset;
mod synthetic;

pub use csv_io::{load_csv, read_csv, save_csv, to_csv_string};
pub use dataset::{Dataset, Instance};
pub use synthetic::{generate_synthetic, SyntheticSpec};

use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    /// Share of the data used for training+validation; the rest is test.
    pub train_fraction: f64,
    /// Share of the training portion held out for validation.
    pub val_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            val_fraction: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Split {
    pub train: Dataset,
    pub val: Dataset,
    pub test: Dataset,
}

fn check_fraction(name: &str, f: f64) -> Result<()> {
    if f > 0.0 && f < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must lie in (0, 1), got {f}")))
    }
}

/// Shuffles by `spec.seed` and partitions into train/val/test.
pub fn split(ds: &Dataset, spec: &SplitSpec) -> Result<Split> {
    check_fraction("train fraction", spec.train_fraction)?;
    check_fraction("validation fraction", spec.val_fraction)?;
    let n = ds.len();
    let n_test = (n as f64 * (1.0 - spec.train_fraction)).round() as usize;
    let n_train_all = n - n_test.min(n);
    let n_val = (n_train_all as f64 * spec.val_fraction).round() as usize;
    let n_train = n_train_all - n_val.min(n_train_all);
    if n_test == 0 || n_val == 0 || n_train == 0 {
        return Err(Error::Config(format!(
            "dataset of {n} instances yields an empty partition (train {n_train}, val {n_val}, test {n_test})"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    RngStream::new(spec.seed).shuffle(&mut order);
    Ok(Split {
        train: ds.subset(&order[..n_train]),
        val: ds.subset(&order[n_train..n_train + n_val]),
        test: ds.subset(&order[n_train + n_val..]),
    })
}

/// Undersamples the majority class without replacement so both classes are
/// equally represented. Surviving instances keep their original order.
pub fn undersample_balance(train: &Dataset, rng: &mut RngStream) -> Result<Dataset> {
    let [neg, pos] = train.class_counts();
    if neg == 0 || pos == 0 {
        return Err(Error::Config(format!(
            "cannot balance a training set with class counts {neg}/{pos}"
        )));
    }
    if neg == pos {
        return Ok(train.clone());
    }
    let majority = u8::from(pos > neg);
    let keep_n = neg.min(pos);
    let majority_idx: Vec<usize> = train
        .instances()
        .iter()
        .enumerate()
        .filter(|(_, i)| i.label == majority)
        .map(|(k, _)| k)
        .collect();
    let mut keep = vec![false; train.len()];
    for k in rng.sample_indices(majority_idx.len(), keep_n) {
        keep[majority_idx[k]] = true;
    }
    let idx: Vec<usize> = train
        .instances()
        .iter()
        .enumerate()
        .filter(|(k, i)| i.label != majority || keep[*k])
        .map(|(k, _)| k)
        .collect();
    Ok(train.subset(&idx))
}

/// Adds independent `N(0, intensity²)` noise to every feature coordinate.
pub fn inject_shift(ds: &Dataset, intensity: f64, rng: &mut RngStream) -> Result<Dataset> {
    if !(intensity >= 0.0) || !intensity.is_finite() {
        return Err(Error::Argument(format!("shift intensity must be >= 0, got {intensity}")));
    }
    let mut out = ds.clone();
    if intensity == 0.0 {
        return Ok(out);
    }
    for inst in out.instances_mut() {
        for v in &mut inst.features {
            *v += intensity * rng.standard_normal();
        }
    }
    Ok(out)
}
