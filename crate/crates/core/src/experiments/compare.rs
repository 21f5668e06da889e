use rayon::prelude::*;

use super::{fmt_f64, fmt_opt, rep_seed, ExperimentKind, ExperimentOutput, Table};
use crate::config::RunConfig;
use crate::curation::{curation_loop, CurationResult};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::stats::mean_std;

pub const CURVES_HEADER: &str = "selector,rep,seed,round,fraction_added,f1,mean_epi,mean_ale";
pub const COMPARE_SUMMARY_HEADER: &str =
    "selector,round,fraction_added,f1_mean,f1_var,f1_std,mean_epi,mean_ale,n";

/// Noise-tagged share among the selections made up to the row closest to `fraction`.
pub fn noisy_fraction_at(res: &CurationResult, ds: &Dataset, fraction: f64) -> Option<f64> {
    let row = res.row_at(fraction)?;
    let count = (row.fraction_added * res.pool_size as f64).round() as usize;
    res.noisy_fraction_of_first(ds, count)
}

/// Runs the curation loop for every selector and repetition. Repetition seeds
/// are shared across selectors, so every selector starts from the same split
/// and the same initial model.
pub fn run_selector_comparison(cfg: &RunConfig, ds: &Dataset) -> Result<ExperimentOutput> {
    if cfg.selectors.is_empty() {
        return Err(Error::Config("experiment.selectors is empty".into()));
    }
    let cells: Vec<(usize, usize)> = (0..cfg.repetitions)
        .flat_map(|r| (0..cfg.selectors.len()).map(move |s| (r, s)))
        .collect();
    let results: Vec<CurationResult> = cells
        .par_iter()
        .map(|&(rep, s)| {
            let sel = cfg.selectors[s];
            curation_loop(ds, sel, &cfg.curation, rep_seed(cfg.seed, rep))
                .map_err(|e| e.context(format!("selector {sel}, repetition {rep}")))
        })
        .collect::<Result<_>>()?;

    let mut curves = format!("{CURVES_HEADER}\n");
    let mut summary = format!("{COMPARE_SUMMARY_HEADER}\n");
    for (s, sel) in cfg.selectors.iter().enumerate() {
        let runs: Vec<(usize, &CurationResult)> = cells
            .iter()
            .zip(&results)
            .filter(|((_, cs), _)| *cs == s)
            .map(|(&(rep, _), r)| (rep, r))
            .collect();
        for (rep, res) in &runs {
            for row in &res.rows {
                curves.push_str(&format!(
                    "{sel},{rep},{},{},{},{},{},{}\n",
                    res.seed,
                    row.round,
                    fmt_f64(row.fraction_added),
                    fmt_f64(row.f1),
                    fmt_f64(row.mean_epi),
                    fmt_f64(row.mean_ale)
                ));
            }
        }
        let rounds = runs.iter().map(|(_, r)| r.rows.len()).min().unwrap_or(0);
        for round in 0..rounds {
            let rows: Vec<_> = runs.iter().map(|(_, r)| r.rows[round]).collect();
            let f1: Vec<f64> = rows.iter().map(|r| r.f1).collect();
            let (fm, fs) = mean_std(&f1);
            let (em, _) = mean_std(&rows.iter().map(|r| r.mean_epi).collect::<Vec<_>>());
            let (am, _) = mean_std(&rows.iter().map(|r| r.mean_ale).collect::<Vec<_>>());
            summary.push_str(&format!(
                "{sel},{round},{},{},{},{},{},{},{}\n",
                fmt_f64(rows[0].fraction_added),
                fmt_f64(fm),
                fmt_f64(fs * fs),
                fmt_f64(fs),
                fmt_f64(em),
                fmt_f64(am),
                rows.len()
            ));
        }
    }

    // One row per repetition, one F1 and one noisy-share column per selector.
    let mut checkpoint = String::from("rep,seed");
    for sel in &cfg.selectors {
        checkpoint.push_str(&format!(",f1_{sel}"));
    }
    for sel in &cfg.selectors {
        checkpoint.push_str(&format!(",noisy_{sel}"));
    }
    checkpoint.push('\n');
    for rep in 0..cfg.repetitions {
        let base = rep * cfg.selectors.len();
        let runs = &results[base..base + cfg.selectors.len()];
        checkpoint.push_str(&format!("{rep},{}", rep_seed(cfg.seed, rep)));
        for r in runs {
            checkpoint.push_str(&format!(",{}", fmt_opt(r.row_at(cfg.checkpoint).map(|row| row.f1))));
        }
        for r in runs {
            checkpoint.push_str(&format!(",{}", fmt_opt(noisy_fraction_at(r, ds, cfg.checkpoint))));
        }
        checkpoint.push('\n');
    }

    Ok(ExperimentOutput {
        kind: ExperimentKind::Compare,
        tables: vec![
            Table {
                name: "summary",
                csv: summary,
            },
            Table { name: "curves", csv: curves },
            Table {
                name: "checkpoint",
                csv: checkpoint,
            },
        ],
    })
}
