//! Experiment drivers (quality shift, data growth, selector comparison) and
//! their deterministic CSV + manifest output.

mod compare;
mod growth;
mod report;
mod shift;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use compare::run_selector_comparison;
pub use growth::run_data_growth_experiment;
pub use report::{read_columns, significance, SignificanceReport};
pub use shift::run_shift_experiment;

use crate::config::{DataSource, RunConfig, Settings};
use crate::data::{generate_synthetic, load_csv, Dataset};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, label};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Shift,
    Growth,
    Compare,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentKind::Shift => "shift",
            ExperimentKind::Growth => "growth",
            ExperimentKind::Compare => "compare",
        })
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shift" => Ok(ExperimentKind::Shift),
            "growth" | "data-growth" => Ok(ExperimentKind::Growth),
            "compare" | "selector-compare" => Ok(ExperimentKind::Compare),
            other => Err(Error::Config(format!("unknown experiment `{other}` (expected shift|growth|compare)"))),
        }
    }
}

/// A fully resolved experiment: raw settings (for the manifest) plus their typed view.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub settings: Settings,
    pub config: RunConfig,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind, settings: Settings) -> Result<Self> {
        let config = RunConfig::from_settings(&settings)?;
        Ok(Self { kind, settings, config })
    }

    /// Seed of repetition `rep`.
    pub fn rep_seed(&self, rep: usize) -> u64 {
        rep_seed(self.config.seed, rep)
    }
}

pub fn rep_seed(seed: u64, rep: usize) -> u64 {
    derive_seed(seed, label("repetition") ^ rep as u64)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Loads (or generates) the experiment data and binds the model input size.
pub fn load_dataset(config: &mut RunConfig) -> Result<(Dataset, Vec<InputDigest>)> {
    let (ds, inputs) = match &config.data {
        DataSource::Synthetic(spec) => (generate_synthetic(spec)?, Vec::new()),
        DataSource::Csv(path) => {
            let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
            let digest = InputDigest {
                path: path.display().to_string(),
                sha256: hex::encode(Sha256::digest(&bytes)),
            };
            (load_csv(path)?, vec![digest])
        }
    };
    config.bind_input_dim(ds.feature_dim());
    Ok((ds, inputs))
}

/// One named result table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub name: &'static str,
    pub csv: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentOutput {
    pub kind: ExperimentKind,
    pub tables: Vec<Table>,
}

impl ExperimentOutput {
    pub fn table(&self, name: &str) -> Option<&str> {
        self.tables.iter().find(|t| t.name == name).map(|t| t.csv.as_str())
    }
}

/// Runs the experiment named by `spec.kind` on `dataset`.
pub fn run(spec: &ExperimentSpec, dataset: &Dataset) -> Result<ExperimentOutput> {
    match spec.kind {
        ExperimentKind::Shift => run_shift_experiment(&spec.config, dataset),
        ExperimentKind::Growth => run_data_growth_experiment(&spec.config, dataset),
        ExperimentKind::Compare => run_selector_comparison(&spec.config, dataset),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub master: u64,
    pub repetitions: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub experiment: ExperimentKind,
    pub spec_hash: String,
    pub config: std::collections::BTreeMap<String, String>,
    pub seeds: Seeds,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    pub created_unix: u64,
}

/// Hash of everything that determines the results.
pub fn spec_hash(kind: ExperimentKind, settings: &Settings, inputs: &[InputDigest]) -> String {
    let mut h = Sha256::new();
    h.update(kind.to_string().as_bytes());
    h.update(b"\n");
    h.update(settings.to_text().as_bytes());
    for i in inputs {
        h.update(i.sha256.as_bytes());
    }
    hex::encode(h.finalize())
}

/// Writes every table as `<kind>-<hash12>-<table>.csv` and the manifest as
/// `<kind>-<hash12>-manifest.json` into an existing directory.
pub fn write_outputs(
    out_dir: &Path,
    spec: &ExperimentSpec,
    inputs: &[InputDigest],
    output: &ExperimentOutput,
) -> Result<(PathBuf, RunManifest)> {
    if !out_dir.is_dir() {
        return Err(Error::io(
            out_dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "output directory does not exist"),
        ));
    }
    let hash = spec_hash(spec.kind, &spec.settings, inputs);
    let stem = format!("{}-{}", spec.kind, &hash[..12]);
    let mut outputs = Vec::new();
    for t in &output.tables {
        let path = out_dir.join(format!("{stem}-{}.csv", t.name));
        std::fs::write(&path, &t.csv).map_err(|e| Error::io(&path, e))?;
        outputs.push(path.display().to_string());
    }
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        experiment: spec.kind,
        spec_hash: hash,
        config: spec.settings.resolved().clone(),
        seeds: Seeds {
            master: spec.config.seed,
            repetitions: (0..spec.config.repetitions).map(|r| spec.rep_seed(r)).collect(),
        },
        inputs: inputs.to_vec(),
        outputs,
        created_unix: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
    };
    let path = out_dir.join(format!("{stem}-manifest.json"));
    let json = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    Ok((path, manifest))
}

/// Re-creates the spec recorded in a manifest.
pub fn spec_from_manifest(manifest: &RunManifest) -> Result<ExperimentSpec> {
    let mut settings = Settings::default();
    for (k, v) in &manifest.config {
        settings.set(k, v)?;
    }
    ExperimentSpec::new(manifest.experiment, settings)
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<RunManifest> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub(crate) fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}
