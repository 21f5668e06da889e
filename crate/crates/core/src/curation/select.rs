use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Uncertainty estimates for one pool candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyRecord {
    pub id: String,
    pub epistemic: f64,
    pub aleatoric: f64,
    pub p_bar: [f64; 2],
}

impl UncertaintyRecord {
    pub fn new(id: impl Into<String>, epistemic: f64, aleatoric: f64) -> Self {
        Self {
            id: id.into(),
            epistemic,
            aleatoric,
            p_bar: [0.5, 0.5],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Selector {
    /// Highest epistemic first, skipping candidates among the noisiest.
    Ehal,
    /// Mirror baseline: lowest epistemic first, skipping candidates among the cleanest.
    Elah,
    Random,
}

impl Selector {
    pub const ALL: [Selector; 3] = [Selector::Ehal, Selector::Random, Selector::Elah];
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Selector::Ehal => "ehal",
            Selector::Elah => "elah",
            Selector::Random => "random",
        })
    }
}

impl FromStr for Selector {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ehal" => Ok(Selector::Ehal),
            "elah" => Ok(Selector::Elah),
            "random" => Ok(Selector::Random),
            other => Err(Error::Config(format!("unknown selector `{other}` (expected ehal|elah|random)"))),
        }
    }
}

/// Size of the aleatoric rejection set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NAle {
    Count(usize),
    /// `⌈fraction · |pool|⌉`, recomputed for the current pool.
    Fraction(f64),
}

impl Default for NAle {
    fn default() -> Self {
        NAle::Fraction(0.1)
    }
}

impl NAle {
    pub fn resolve(&self, pool_size: usize) -> usize {
        match *self {
            NAle::Count(n) => n.max(1),
            NAle::Fraction(f) => ((f * pool_size as f64).ceil() as usize).max(1),
        }
    }
}

impl fmt::Display for NAle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NAle::Count(n) => write!(f, "{n}"),
            NAle::Fraction(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for NAle {
    type Err = Error;
    /// Integers are absolute counts; values with a decimal point are fractions.
    fn from_str(s: &str) -> Result<Self> {
        if let Ok(n) = s.parse::<usize>() {
            return if n >= 1 {
                Ok(NAle::Count(n))
            } else {
                Err(Error::Config("n_ale must be >= 1".into()))
            };
        }
        match s.parse::<f64>() {
            Ok(f) if f > 0.0 && f <= 1.0 => Ok(NAle::Fraction(f)),
            _ => Err(Error::Config(format!("n_ale `{s}` is neither a count >= 1 nor a fraction in (0, 1]"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Extreme {
    High,
    Low,
}

impl Extreme {
    /// Orders "more extreme first", ties broken by ascending id.
    fn cmp(self, a: f64, a_id: &str, b: f64, b_id: &str) -> Ordering {
        let by_value = match self {
            Extreme::High => b.total_cmp(&a),
            Extreme::Low => a.total_cmp(&b),
        };
        by_value.then_with(|| a_id.cmp(b_id))
    }
}

fn order_by(records: &[UncertaintyRecord], dir: Extreme, key: impl Fn(&UncertaintyRecord) -> f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..records.len()).collect();
    idx.sort_by(|&a, &b| dir.cmp(key(&records[a]), &records[a].id, key(&records[b]), &records[b].id));
    idx
}

/// Id with the largest epistemic value; ties go to the lexicographically smallest id.
pub fn top_one_by_epistemic(records: &[UncertaintyRecord]) -> Result<&str> {
    records
        .iter()
        .min_by(|a, b| Extreme::High.cmp(a.epistemic, &a.id, b.epistemic, &b.id))
        .map(|r| r.id.as_str())
        .ok_or_else(|| Error::Argument("empty candidate pool".into()))
}

/// The `min(n_ale, |pool|)` ids with the largest aleatoric values (same tie rule).
pub fn top_n_by_aleatoric(records: &[UncertaintyRecord], n_ale: usize) -> BTreeSet<&str> {
    order_by(records, Extreme::High, |r| r.aleatoric)
        .into_iter()
        .take(n_ale)
        .map(|i| records[i].id.as_str())
        .collect()
}

/// Select-then-reject over one direction; returns an index into `records`.
///
/// Walking candidates in epistemic order, the k-th rejected candidate shrinks
/// the view, so the aleatoric rejection set of the shrunken view is the first
/// `n_ale + k` aleatoric ranks minus the rejected ones. A candidate therefore
/// survives iff its aleatoric rank is at least `n_ale + rejected`.
///
/// If every candidate is rejected, the pick is the top epistemic candidate
/// outside the full view's top-`n_ale` aleatoric set, or the top epistemic
/// candidate overall when that set covers the whole view.
fn select_one(records: &[UncertaintyRecord], n_ale: usize, dir: Extreme) -> Result<usize> {
    if records.is_empty() {
        return Err(Error::Argument("empty candidate pool".into()));
    }
    let epi_order = order_by(records, dir, |r| r.epistemic);
    let mut ale_rank = vec![0usize; records.len()];
    for (rank, i) in order_by(records, dir, |r| r.aleatoric).into_iter().enumerate() {
        ale_rank[i] = rank;
    }
    let mut rejected = 0;
    for &i in &epi_order {
        if ale_rank[i] >= n_ale + rejected {
            return Ok(i);
        }
        rejected += 1;
    }
    Ok(epi_order
        .iter()
        .copied()
        .find(|&i| ale_rank[i] >= n_ale)
        .unwrap_or(epi_order[0]))
}

/// One EHAL pick; returns the selected id.
pub fn ehal_select_one(records: &[UncertaintyRecord], n_ale: usize) -> Result<&str> {
    select_one(records, n_ale, Extreme::High).map(|i| records[i].id.as_str())
}

/// One ELAH pick (lowest epistemic, rejected when among the lowest aleatoric).
pub fn elah_select_one(records: &[UncertaintyRecord], n_ale: usize) -> Result<&str> {
    select_one(records, n_ale, Extreme::Low).map(|i| records[i].id.as_str())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurationConfig {
    pub n_to_select: usize,
    pub n_ale: NAle,
    pub selector: Selector,
    pub seed: u64,
}

/// Repeatedly applies the selector, removing each pick from the pool, until
/// `n_to_select` ids are chosen or the pool is empty.
pub fn curate(pool: &[UncertaintyRecord], config: &CurationConfig) -> Result<Vec<String>> {
    if config.n_to_select > pool.len() {
        return Err(Error::Argument(format!(
            "cannot select {} of {} candidates",
            config.n_to_select,
            pool.len()
        )));
    }
    if let NAle::Count(0) = config.n_ale {
        return Err(Error::Argument("n_ale must be >= 1".into()));
    }
    if pool.iter().any(|r| !r.epistemic.is_finite() || !r.aleatoric.is_finite()) {
        return Err(Error::Argument("uncertainty values must be finite".into()));
    }
    let dir = match config.selector {
        Selector::Ehal => Extreme::High,
        Selector::Elah => Extreme::Low,
        Selector::Random => {
            let mut order: Vec<usize> = (0..pool.len()).collect();
            RngStream::new(config.seed).shuffle(&mut order);
            return Ok(order[..config.n_to_select].iter().map(|&i| pool[i].id.clone()).collect());
        }
    };
    let mut remaining = pool.to_vec();
    let mut picked = Vec::with_capacity(config.n_to_select);
    while picked.len() < config.n_to_select && !remaining.is_empty() {
        let n_ale = config.n_ale.resolve(remaining.len());
        let i = select_one(&remaining, n_ale, dir)?;
        picked.push(remaining.swap_remove(i).id);
    }
    Ok(picked)
}
