//! Selector comparison: curation learning curves for EHAL, ELAH and random.
//!
//! Uses the quick smoke profile unless a config file is given; pass
//! `configs/standard.conf` for the full 10-repetition study.
//!
//!     cargo run --release --example selector_comparison [CONFIG] [OUT_DIR]

use std::path::PathBuf;

use uq_curate::config::Settings;
use uq_curate::experiments::{load_dataset, run, write_outputs, ExperimentKind, ExperimentSpec};

fn main() -> uq_curate::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/smoke.conf"));
    let mut spec = ExperimentSpec::new(ExperimentKind::Compare, Settings::load(&config)?)?;
    let (data, inputs) = load_dataset(&mut spec.config)?;
    let output = run(&spec, &data)?;
    for table in &output.tables {
        println!("== {}\n{}", table.name, table.csv);
    }
    if let Some(dir) = args.next() {
        let (manifest, _) = write_outputs(dir.as_ref(), &spec, &inputs, &output)?;
        println!("manifest: {}", manifest.display());
    }
    Ok(())
}
