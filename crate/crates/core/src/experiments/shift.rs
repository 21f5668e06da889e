use rayon::prelude::*;

use super::{fmt_f64, rep_seed, ExperimentKind, ExperimentOutput, Table};
use crate::config::RunConfig;
use crate::data::{inject_shift, split, undersample_balance, Dataset, SplitSpec};
use crate::error::{Error, Result};
use crate::metrics::EvalReport;
use crate::model::Ensemble;
use crate::pipeline::{member_seed, FittedUq, UqMethod};
use crate::rng::{derive_seed, label, RngStream};
use crate::stats::mean_std;

pub const SHIFT_SUMMARY_HEADER: &str = "method,intensity,f1_mean,f1_std,brier_mean,brier_std,n";
pub const SHIFT_RUNS_HEADER: &str = "method,intensity,rep,seed,f1,brier";

/// Result of one (repetition, intensity) cell, one report per configured method.
fn shift_cell(cfg: &RunConfig, ds: &Dataset, rep: usize, intensity: f64) -> Result<Vec<EvalReport>> {
    let seed = rep_seed(cfg.seed, rep);
    let parts = split(ds, &SplitSpec { seed, ..cfg.split })?;
    let mut balance_rng = RngStream::new(derive_seed(seed, label("balance")));
    let mut train = undersample_balance(&parts.train, &mut balance_rng)?;
    let (mut val, mut test) = (parts.val, parts.test);

    // The same unit draws are scaled by every intensity of a repetition.
    let noise = RngStream::new(derive_seed(seed, label("shift")));
    let p = cfg.shift_partitions;
    if p.train {
        train = inject_shift(&train, intensity, &mut noise.child("train"))?;
    }
    if p.val {
        val = inject_shift(&val, intensity, &mut noise.child("val"))?;
    }
    if p.test {
        test = inject_shift(&test, intensity, &mut noise.child("test"))?;
    }

    // Vanilla and MC-dropout use member 0 of the ensemble.
    let members = if cfg.methods.contains(&UqMethod::Ensemble) {
        cfg.uq.ensemble_size
    } else {
        1
    };
    let train_seed = derive_seed(seed, label("train"));
    let seeds: Vec<u64> = (0..members).map(|k| member_seed(train_seed, k)).collect();
    let ensemble = Ensemble::train(&cfg.uq.model, &train, &val, &seeds)?;

    cfg.methods
        .iter()
        .map(|&method| {
            let fitted = match method {
                UqMethod::Vanilla => FittedUq::Single {
                    model: ensemble.members()[0].clone(),
                    passes: 1,
                },
                UqMethod::McDropout => FittedUq::Single {
                    model: ensemble.members()[0].clone(),
                    passes: cfg.uq.mc_passes,
                },
                UqMethod::Ensemble => FittedUq::Ensemble(ensemble.clone()),
            };
            let mut rng = RngStream::new(derive_seed(seed, label("eval") ^ label(&method.to_string())));
            fitted.evaluate(&test, &mut rng)
        })
        .collect()
}

/// For every method and intensity: split, balance, inject shift, train, evaluate;
/// averaged over repetitions.
pub fn run_shift_experiment(cfg: &RunConfig, ds: &Dataset) -> Result<ExperimentOutput> {
    if cfg.methods.is_empty() || cfg.intensities.is_empty() {
        return Err(Error::Config("shift experiment needs at least one method and one intensity".into()));
    }
    let cells: Vec<(usize, usize)> = (0..cfg.repetitions)
        .flat_map(|r| (0..cfg.intensities.len()).map(move |i| (r, i)))
        .collect();
    let results: Vec<Vec<EvalReport>> = cells
        .par_iter()
        .map(|&(rep, i)| {
            shift_cell(cfg, ds, rep, cfg.intensities[i])
                .map_err(|e| e.context(format!("shift repetition {rep}, intensity {}", cfg.intensities[i])))
        })
        .collect::<Result<_>>()?;

    let mut summary = format!("{SHIFT_SUMMARY_HEADER}\n");
    let mut runs = format!("{SHIFT_RUNS_HEADER}\n");
    for (m, method) in cfg.methods.iter().enumerate() {
        for (i, &intensity) in cfg.intensities.iter().enumerate() {
            let mut f1 = Vec::new();
            let mut brier = Vec::new();
            for (c, &(rep, ci)) in cells.iter().enumerate() {
                if ci != i {
                    continue;
                }
                let r = &results[c][m];
                f1.push(r.f1);
                brier.push(r.brier);
                runs.push_str(&format!(
                    "{method},{},{rep},{},{},{}\n",
                    fmt_f64(intensity),
                    rep_seed(cfg.seed, rep),
                    fmt_f64(r.f1),
                    fmt_f64(r.brier)
                ));
            }
            let (fm, fs) = mean_std(&f1);
            let (bm, bs) = mean_std(&brier);
            summary.push_str(&format!(
                "{method},{},{},{},{},{},{}\n",
                fmt_f64(intensity),
                fmt_f64(fm),
                fmt_f64(fs),
                fmt_f64(bm),
                fmt_f64(bs),
                f1.len()
            ));
        }
    }
    Ok(ExperimentOutput {
        kind: ExperimentKind::Shift,
        tables: vec![
            Table {
                name: "summary",
                csv: summary,
            },
            Table { name: "runs", csv: runs },
        ],
    })
}
