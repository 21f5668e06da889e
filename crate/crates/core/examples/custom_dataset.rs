//! Run the whole pipeline on your own feature CSV
//! (`id,f0,...,f{d-1},label[,noise_tag]`).
//!
//!     cargo run --release --example custom_dataset [CSV]
//!
//! Defaults to the 200-row fixture shipped with the tests.

use std::path::PathBuf;

use uq_curate::config::Settings;
use uq_curate::curation::Selector;
use uq_curate::data::{load_csv, split, undersample_balance};
use uq_curate::experiments::{load_dataset, run, ExperimentKind, ExperimentSpec};
use uq_curate::rng::RngStream;

fn main() -> uq_curate::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/features_200.csv"));
    let data = load_csv(&path)?;
    println!("{}: {} rows, {} features, class counts {:?}", path.display(), data.len(), data.feature_dim(), data.class_counts());

    let mut settings = Settings::load(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/smoke.conf"))?;
    settings.set("data.path", &path.display().to_string())?;

    let mut spec = ExperimentSpec::new(ExperimentKind::Compare, settings.clone())?;
    let (data, _) = load_dataset(&mut spec.config)?;
    let parts = split(&data, &spec.config.split)?;
    let train = undersample_balance(&parts.train, &mut RngStream::new(1))?;
    let fitted = spec.config.uq.fit(&train, &parts.val, 1)?;
    let report = fitted.evaluate(&parts.test, &mut RngStream::new(2))?;
    println!("{} model: F1 {:.3}, Brier {:.3}", spec.config.uq.method, report.f1, report.brier);

    spec.config.selectors = vec![Selector::Ehal, Selector::Random];
    let out = run(&spec, &data)?;
    println!("{}", out.table("summary").unwrap_or_default());

    let shift = ExperimentSpec::new(ExperimentKind::Shift, settings)?;
    let mut shift = shift;
    shift.config.bind_input_dim(data.feature_dim());
    println!("{}", run(&shift, &data)?.table("summary").unwrap_or_default());
    Ok(())
}
