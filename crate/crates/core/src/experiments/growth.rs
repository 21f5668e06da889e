use rayon::prelude::*;

use super::{fmt_f64, rep_seed, ExperimentKind, ExperimentOutput, Table};
use crate::config::RunConfig;
use crate::data::{split, undersample_balance, Dataset, SplitSpec};
use crate::error::{Error, Result};
use crate::model::Head;
use crate::pipeline::{UncertaintySource, UqMethod};
use crate::rng::{derive_seed, label, RngStream};
use crate::stats::mean_std;

pub const GROWTH_HEADER: &str =
    "fraction,n_train_mean,h_epi_mean,h_epi_std,h_ale_mean,h_ale_std,f1_mean,f1_std,n,delta_epi_pct,delta_ale_pct";

struct GrowthCell {
    n_train: usize,
    h_epi: f64,
    h_ale: f64,
    f1: f64,
}

/// Balanced training partition of repetition `rep`, in a random order whose
/// prefixes form the nested subsets.
fn nested_pool(cfg: &RunConfig, ds: &Dataset, rep: usize) -> Result<(Dataset, Dataset, Dataset)> {
    let seed = rep_seed(cfg.seed, rep);
    let parts = split(ds, &SplitSpec { seed, ..cfg.split })?;
    let mut rng = RngStream::new(derive_seed(seed, label("balance")));
    let balanced = undersample_balance(&parts.train, &mut rng)?;
    let mut order: Vec<usize> = (0..balanced.len()).collect();
    RngStream::new(derive_seed(seed, label("nest"))).shuffle(&mut order);
    Ok((balanced.subset(&order), parts.val, parts.test))
}

pub(crate) fn prefix_len(fraction: f64, n: usize) -> usize {
    ((fraction * n as f64).round() as usize).clamp(1, n)
}

fn growth_cell(cfg: &RunConfig, ds: &Dataset, rep: usize, fraction: f64) -> Result<GrowthCell> {
    let (pool, val, test) = nested_pool(cfg, ds, rep)?;
    let n = prefix_len(fraction, pool.len());
    let idx: Vec<usize> = (0..n).collect();
    let train = pool.subset(&idx);
    let seed = rep_seed(cfg.seed, rep);
    // Same network seeds at every fraction of a repetition.
    let fitted = cfg.uq.fit(&train, &val, derive_seed(seed, label("train")))?;
    let mut rng = RngStream::new(derive_seed(seed, label("eval")));
    let records = fitted.records(&test, UncertaintySource::Hetero, &mut rng)?;
    let probs: Vec<[f64; 2]> = records.iter().map(|r| r.p_bar).collect();
    let f1 = crate::metrics::classification_report(&probs, &test.labels())?.f1;
    let m = records.len() as f64;
    Ok(GrowthCell {
        n_train: n,
        h_epi: records.iter().map(|r| r.epistemic).sum::<f64>() / m,
        h_ale: records.iter().map(|r| r.aleatoric).sum::<f64>() / m,
        f1,
    })
}

/// Relative drop from `prev` to `cur` in percent.
pub fn delta_pct(prev: f64, cur: f64) -> f64 {
    (prev - cur) / prev * 100.0
}

/// Trains heteroscedastic ensembles on nested fractions of the (balanced)
/// training partition and reports test-set mean H_epi / H_ale with the
/// relative change from the previous fraction.
pub fn run_data_growth_experiment(cfg: &RunConfig, ds: &Dataset) -> Result<ExperimentOutput> {
    if cfg.uq.model.head != Head::Heteroscedastic || cfg.uq.method != UqMethod::Ensemble {
        return Err(Error::Config(
            "the data-growth study needs model.head = hetero and uq.method = ensemble".into(),
        ));
    }
    if cfg.uq.ensemble_size < 2 {
        return Err(Error::Config("the data-growth study needs uq.ensemble_size >= 2".into()));
    }
    if cfg.growth_fractions.is_empty() {
        return Err(Error::Config("experiment.growth_fractions is empty".into()));
    }
    let fractions = &cfg.growth_fractions;
    let cells: Vec<(usize, usize)> = (0..cfg.repetitions)
        .flat_map(|r| (0..fractions.len()).map(move |f| (r, f)))
        .collect();
    let results: Vec<GrowthCell> = cells
        .par_iter()
        .map(|&(rep, f)| {
            growth_cell(cfg, ds, rep, fractions[f])
                .map_err(|e| e.context(format!("growth repetition {rep}, fraction {}", fractions[f])))
        })
        .collect::<Result<_>>()?;

    let mut csv = format!("{GROWTH_HEADER}\n");
    let mut prev: Option<(f64, f64)> = None;
    for (f, &fraction) in fractions.iter().enumerate() {
        let cell: Vec<&GrowthCell> = cells
            .iter()
            .zip(&results)
            .filter(|((_, cf), _)| *cf == f)
            .map(|(_, c)| c)
            .collect();
        let col = |g: fn(&GrowthCell) -> f64| mean_std(&cell.iter().map(|c| g(c)).collect::<Vec<_>>());
        let (em, es) = col(|c| c.h_epi);
        let (am, as_) = col(|c| c.h_ale);
        let (fm, fs) = col(|c| c.f1);
        let (nm, _) = col(|c| c.n_train as f64);
        let (de, da) = prev.map_or((0.0, 0.0), |(pe, pa)| (delta_pct(pe, em), delta_pct(pa, am)));
        prev = Some((em, am));
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            fmt_f64(fraction),
            fmt_f64(nm),
            fmt_f64(em),
            fmt_f64(es),
            fmt_f64(am),
            fmt_f64(as_),
            fmt_f64(fm),
            fmt_f64(fs),
            cell.len(),
            fmt_f64(de),
            fmt_f64(da)
        ));
    }
    Ok(ExperimentOutput {
        kind: ExperimentKind::Growth,
        tables: vec![Table {
            name: "summary",
            csv,
        }],
    })
}
