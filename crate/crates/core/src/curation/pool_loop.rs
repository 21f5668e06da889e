use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::select::{curate, CurationConfig, NAle, Selector};
use crate::data::{undersample_balance, Dataset};
use crate::error::{Error, Result};
use crate::pipeline::{FittedUq, UncertaintySource, UqSetup};
use crate::rng::{derive_seed, label, RngStream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopConfig {
    /// Share of the data forming the initial training set (validation is carved from it).
    pub seed_fraction: f64,
    /// Share of the data forming the candidate pool; the remainder is the test set.
    pub pool_fraction: f64,
    /// Tranche size per round as a share of the original pool.
    pub tranche_fraction: f64,
    /// Share of the initial training set held out for early stopping.
    pub val_fraction: f64,
    /// Stop after this many selection rounds even if the pool is not exhausted.
    pub max_rounds: Option<usize>,
    pub n_ale: NAle,
    pub source: UncertaintySource,
    pub uq: UqSetup,
}

/// One point on a learning curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub round: usize,
    pub fraction_added: f64,
    pub f1: f64,
    /// Mean epistemic uncertainty of the round's model over the test set.
    pub mean_epi: f64,
    /// Mean aleatoric uncertainty of the round's model over the test set.
    pub mean_ale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurationResult {
    pub selector: Selector,
    pub seed: u64,
    /// Pool ids in the order they were added.
    pub selected: Vec<String>,
    /// Selected ids per round.
    pub tranches: Vec<Vec<String>>,
    pub rows: Vec<CurveRow>,
    pub pool_size: usize,
    /// Noise-tagged share of the original pool (synthetic data only).
    pub pool_noisy_fraction: Option<f64>,
}

impl CurationResult {
    /// Row whose `fraction_added` is closest to `fraction`.
    pub fn row_at(&self, fraction: f64) -> Option<&CurveRow> {
        self.rows
            .iter()
            .min_by(|a, b| (a.fraction_added - fraction).abs().total_cmp(&(b.fraction_added - fraction).abs()))
    }

    /// Noise-tagged share among the first `count` selections.
    pub fn noisy_fraction_of_first(&self, dataset: &Dataset, count: usize) -> Option<f64> {
        if !dataset.has_noise_tags() || count == 0 {
            return None;
        }
        let noisy: HashSet<&str> = dataset
            .instances()
            .iter()
            .filter(|i| i.is_noisy())
            .map(|i| i.id.as_str())
            .collect();
        let take = count.min(self.selected.len());
        let hits = self.selected[..take].iter().filter(|id| noisy.contains(id.as_str())).count();
        Some(hits as f64 / take as f64)
    }
}

fn seed_for(seed: u64, tag: &str, round: usize) -> u64 {
    derive_seed(derive_seed(seed, label(tag)), round as u64)
}

struct LoopSplit {
    seed_train: Dataset,
    val: Dataset,
    pool: Dataset,
    test: Dataset,
}

fn split_for_loop(dataset: &Dataset, cfg: &LoopConfig, seed: u64) -> Result<LoopSplit> {
    let fracs_ok = cfg.seed_fraction > 0.0
        && cfg.pool_fraction > 0.0
        && cfg.seed_fraction + cfg.pool_fraction < 1.0
        && cfg.val_fraction > 0.0
        && cfg.val_fraction < 1.0
        && cfg.tranche_fraction > 0.0
        && cfg.tranche_fraction <= 1.0;
    if !fracs_ok {
        return Err(Error::Config("curation loop fractions are out of range".into()));
    }
    let n = dataset.len();
    let n_seed = (cfg.seed_fraction * n as f64).round() as usize;
    let n_pool = (cfg.pool_fraction * n as f64).round() as usize;
    let n_val = (cfg.val_fraction * n_seed as f64).round() as usize;
    if n_val == 0 || n_seed <= n_val || n_pool == 0 || n_seed + n_pool >= n {
        return Err(Error::Config(format!("dataset of {n} instances is too small for the curation split")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    RngStream::new(seed_for(seed, "shuffle", 0)).shuffle(&mut order);
    let split = LoopSplit {
        val: dataset.subset(&order[..n_val]),
        seed_train: dataset.subset(&order[n_val..n_seed]),
        pool: dataset.subset(&order[n_seed..n_seed + n_pool]),
        test: dataset.subset(&order[n_seed + n_pool..]),
    };
    let [neg, pos] = split.seed_train.class_counts();
    if neg == 0 || pos == 0 {
        return Err(Error::Config(format!(
            "initial training set has a single class ({neg} negatives, {pos} positives)"
        )));
    }
    Ok(split)
}

fn train_round(cfg: &LoopConfig, train: &Dataset, val: &Dataset, seed: u64, round: usize) -> Result<FittedUq> {
    let mut rng = RngStream::new(seed_for(seed, "balance", round));
    let balanced = undersample_balance(train, &mut rng)?;
    // Model seeds depend on the run seed and round only, never on the selector.
    cfg.uq.fit(&balanced, val, seed_for(seed, "train", round))
}

fn score_round(
    fitted: &FittedUq,
    cfg: &LoopConfig,
    test: &Dataset,
    seed: u64,
    round: usize,
    fraction_added: f64,
) -> Result<CurveRow> {
    let mut rng = RngStream::new(seed_for(seed, "eval", round));
    let records = fitted.records(test, cfg.source, &mut rng)?;
    let f1 = crate::metrics::classification_report(
        &records.iter().map(|r| r.p_bar).collect::<Vec<_>>(),
        &test.labels(),
    )?
    .f1;
    let n = records.len() as f64;
    Ok(CurveRow {
        round,
        fraction_added,
        f1,
        mean_epi: records.iter().map(|r| r.epistemic).sum::<f64>() / n,
        mean_ale: records.iter().map(|r| r.aleatoric).sum::<f64>() / n,
    })
}

/// Seed-set training, pool scoring and tranche selection repeated until the pool
/// is exhausted (or `max_rounds` is hit). Every round retrains from scratch.
pub fn curation_loop(dataset: &Dataset, selector: Selector, cfg: &LoopConfig, seed: u64) -> Result<CurationResult> {
    cfg.uq.validate()?;
    let LoopSplit {
        seed_train,
        val,
        pool,
        test,
    } = split_for_loop(dataset, cfg, seed)?;
    let pool_size = pool.len();
    let pool_noisy_fraction = dataset
        .has_noise_tags()
        .then(|| pool.noisy_count() as f64 / pool_size as f64);
    let tranche = ((cfg.tranche_fraction * pool_size as f64).ceil() as usize).max(1);

    let mut train = seed_train;
    let mut remaining = pool;
    let mut fitted = train_round(cfg, &train, &val, seed, 0)?;
    let mut rows = vec![score_round(&fitted, cfg, &test, seed, 0, 0.0)?];
    let mut selected = Vec::with_capacity(pool_size);
    let mut tranches = Vec::new();

    let mut round = 0;
    while !remaining.is_empty() && cfg.max_rounds.is_none_or(|m| round < m) {
        round += 1;
        let take = tranche.min(remaining.len());
        let picks = if selector == Selector::Random || take == remaining.len() {
            let records: Vec<_> = remaining
                .instances()
                .iter()
                .map(|i| super::UncertaintyRecord::new(i.id.clone(), 0.0, 0.0))
                .collect();
            curate(
                &records,
                &CurationConfig {
                    n_to_select: take,
                    n_ale: cfg.n_ale,
                    selector: Selector::Random,
                    seed: seed_for(seed, "random", round),
                },
            )?
        } else {
            let mut rng = RngStream::new(seed_for(seed, "pool", round));
            let records = fitted.records(&remaining, cfg.source, &mut rng)?;
            curate(
                &records,
                &CurationConfig {
                    n_to_select: take,
                    n_ale: cfg.n_ale,
                    selector,
                    seed: seed_for(seed, "select", round),
                },
            )?
        };

        let chosen: HashSet<&str> = picks.iter().map(String::as_str).collect();
        let (added, kept): (Vec<usize>, Vec<usize>) =
            (0..remaining.len()).partition(|&i| chosen.contains(remaining.instances()[i].id.as_str()));
        // Append in selection order.
        let position: std::collections::HashMap<&str, usize> =
            picks.iter().enumerate().map(|(k, id)| (id.as_str(), k)).collect();
        let mut added = added;
        added.sort_by_key(|&i| position[remaining.instances()[i].id.as_str()]);
        train = train.concat(&remaining.subset(&added))?;
        remaining = remaining.subset(&kept);
        selected.extend(picks.iter().cloned());
        tranches.push(picks);

        fitted = train_round(cfg, &train, &val, seed, round)?;
        let fraction_added = selected.len() as f64 / pool_size as f64;
        rows.push(score_round(&fitted, cfg, &test, seed, round, fraction_added)?);
    }

    Ok(CurationResult {
        selector,
        seed,
        selected,
        tranches,
        rows,
        pool_size,
        pool_noisy_fraction,
    })
}
