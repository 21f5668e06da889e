//! Command-line front end for the `uqcurate` binary.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{DataSource, RunConfig, Settings};
use crate::curation::Selector;
use crate::data::{generate_synthetic, save_csv, split, undersample_balance};
use crate::error::{Error, Result};
use crate::experiments::{self, ExperimentKind, ExperimentSpec};
use crate::metrics::EvalReport;
use crate::model::{checkpoint, Head};
use crate::pipeline::{FittedUq, UqMethod};
use crate::rng::{derive_seed, label, RngStream};

pub const THREADS_ENV: &str = "UQCURATE_THREADS";

const AFTER_HELP: &str = "\
Environment:
  UQCURATE_THREADS   worker threads for repetitions and ensemble members
                     (defaults to RAYON_NUM_THREADS, then the number of CPUs)
  RUST_LOG           log filter, e.g. RUST_LOG=info

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
Run `uqcurate <command> --print-config` to see every config key with its value.";

#[derive(Debug, Parser)]
#[command(name = "uqcurate", version, about = "Uncertainty-driven curation of labeled pools", after_help = AFTER_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct Common {
    /// key = value config file; unset keys keep their defaults.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed (overrides `seed`).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Extra `key=value` override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Print the resolved configuration and exit without writing files.
    #[arg(long)]
    pub print_config: bool,
}

#[derive(Debug, Args, Clone, Default)]
pub struct ModelFlags {
    /// Feature CSV (`id,f0,...,label[,noise_tag]`); default is synthetic data.
    #[arg(long, value_name = "PATH")]
    pub data: Option<PathBuf>,
    /// UQ approximation: vanilla | mc-dropout | ensemble.
    #[arg(long)]
    pub uq: Option<UqMethod>,
    /// Output head: homo | hetero.
    #[arg(long)]
    pub head: Option<Head>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic feature CSV.
    GenData {
        #[command(flatten)]
        common: Common,
        /// Output CSV file (its directory must exist).
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Train one UQ model, write its checkpoint and test-set report.
    Train {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: ModelFlags,
        /// Existing output directory.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Quality-shift study: F1 and Brier per UQ method and shift intensity.
    Shift(ExperimentArgs),
    /// Data-growth study: H_epi and H_ale on nested training fractions.
    Growth(ExperimentArgs),
    /// Selector comparison: curation learning curves for EHAL, ELAH and random.
    Compare(ExperimentArgs),
    /// One-sided Mann-Whitney U test between two result columns.
    Report {
        /// Result CSV files; each column is taken from the first file that has it.
        #[arg(required = true, value_name = "CSV")]
        files: Vec<PathBuf>,
        /// Column expected to be larger.
        #[arg(long, default_value = "f1_ehal")]
        a: String,
        /// Column expected to be smaller.
        #[arg(long, default_value = "f1_elah")]
        b: String,
        /// Also write the JSON summary here.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args, Clone)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub model: ModelFlags,
    /// Selector for `compare`: ehal | elah | random (default: all three).
    #[arg(long)]
    pub selector: Option<Selector>,
    /// Existing output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

fn settings(common: &Common, model: Option<&ModelFlags>, selector: Option<Selector>) -> Result<Settings> {
    let mut s = match &common.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    for kv in &common.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Argument(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        s.set(k.trim(), v.trim())?;
    }
    if let Some(seed) = common.seed {
        s.set("seed", &seed.to_string())?;
    }
    if let Some(m) = model {
        if let Some(path) = &m.data {
            s.set("data.path", &path.display().to_string())?;
        }
        if let Some(uq) = m.uq {
            s.set("uq.method", &uq.to_string())?;
            s.set("experiment.methods", &uq.to_string())?;
        }
        if let Some(head) = m.head {
            s.set("model.head", &head.to_string())?;
        }
    }
    if let Some(sel) = selector {
        s.set("experiment.selectors", &sel.to_string())?;
    }
    Ok(s)
}

fn require_dir(out: Option<&PathBuf>) -> Result<&Path> {
    let out = out.ok_or_else(|| Error::Argument("--out <DIR> is required".into()))?;
    if !out.is_dir() {
        return Err(Error::io(
            out,
            std::io::Error::new(std::io::ErrorKind::NotFound, "output directory does not exist"),
        ));
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
struct TrainReport {
    method: UqMethod,
    head: Head,
    seed: u64,
    n_train: usize,
    n_val: usize,
    n_test: usize,
    report: EvalReport,
}

fn cmd_gen_data(common: &Common, out: &Path) -> Result<()> {
    let s = settings(common, None, None)?;
    let cfg = RunConfig::from_settings(&s)?;
    if common.print_config {
        print!("{}", s.to_text());
        return Ok(());
    }
    let spec = match cfg.data {
        DataSource::Synthetic(spec) => spec,
        DataSource::Csv(_) => return Err(Error::Config("gen-data needs data.path to be empty".into())),
    };
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        if !dir.is_dir() {
            return Err(Error::io(
                dir,
                std::io::Error::new(std::io::ErrorKind::NotFound, "output directory does not exist"),
            ));
        }
    }
    let ds = generate_synthetic(&spec)?;
    save_csv(&ds, out)?;
    println!("wrote {} instances to {}", ds.len(), out.display());
    Ok(())
}

fn cmd_train(common: &Common, flags: &ModelFlags, out: Option<&PathBuf>) -> Result<()> {
    let s = settings(common, Some(flags), None)?;
    let mut cfg = RunConfig::from_settings(&s)?;
    if common.print_config {
        print!("{}", s.to_text());
        return Ok(());
    }
    let out = require_dir(out)?;
    let (ds, _) = experiments::load_dataset(&mut cfg)?;
    let parts = split(&ds, &cfg.split)?;
    let mut rng = RngStream::new(derive_seed(cfg.seed, label("balance")));
    let train = undersample_balance(&parts.train, &mut rng)?;
    let fitted = cfg.uq.fit(&train, &parts.val, derive_seed(cfg.seed, label("train")))?;
    let report = fitted.evaluate(&parts.test, &mut RngStream::new(derive_seed(cfg.seed, label("eval"))))?;

    let ckpt = out.join("model.json");
    match &fitted {
        FittedUq::Single { model, .. } => checkpoint::save_model(model, &ckpt)?,
        FittedUq::Ensemble(e) => checkpoint::save_ensemble(e, &ckpt)?,
    }
    let summary = TrainReport {
        method: cfg.uq.method,
        head: cfg.uq.model.head,
        seed: cfg.seed,
        n_train: train.len(),
        n_val: parts.val.len(),
        n_test: parts.test.len(),
        report,
    };
    let path = out.join("eval.json");
    std::fs::write(&path, serde_json::to_string_pretty(&summary)?).map_err(|e| Error::io(&path, e))?;
    println!(
        "{} {}: F1 {:.4}, Brier {:.4} on {} test instances; wrote {} and {}",
        cfg.uq.method,
        cfg.uq.model.head,
        report.f1,
        report.brier,
        parts.test.len(),
        ckpt.display(),
        path.display()
    );
    Ok(())
}

fn cmd_experiment(kind: ExperimentKind, args: &ExperimentArgs) -> Result<()> {
    let s = settings(&args.common, Some(&args.model), args.selector)?;
    let mut spec = ExperimentSpec::new(kind, s)?;
    if args.common.print_config {
        print!("{}", spec.settings.to_text());
        return Ok(());
    }
    let out = require_dir(args.out.as_ref())?;
    let (ds, inputs) = experiments::load_dataset(&mut spec.config)?;
    let output = experiments::run(&spec, &ds)?;
    let (manifest_path, manifest) = experiments::write_outputs(out, &spec, &inputs, &output)?;
    for p in &manifest.outputs {
        println!("{p}");
    }
    println!("{}", manifest_path.display());
    Ok(())
}

fn cmd_report(files: &[PathBuf], a: &str, b: &str, out: Option<&PathBuf>) -> Result<()> {
    let cols = experiments::read_columns(files, &[a, b])?;
    let report = experiments::significance(a, &cols[0], b, &cols[1])?;
    let json = serde_json::to_string_pretty(&report)?;
    println!("{json}");
    if let Some(path) = out {
        std::fs::write(path, &json).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

/// Sizes the global thread pool from `UQCURATE_THREADS` when set.
pub fn init_threads() -> Result<()> {
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let n: usize = raw
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::State(e.to_string()))?;
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    init_threads()?;
    match &cli.command {
        Command::GenData { common, out } => cmd_gen_data(common, out),
        Command::Train { common, model, out } => cmd_train(common, model, out.as_ref()),
        Command::Shift(args) => cmd_experiment(ExperimentKind::Shift, args),
        Command::Growth(args) => cmd_experiment(ExperimentKind::Growth, args),
        Command::Compare(args) => cmd_experiment(ExperimentKind::Compare, args),
        Command::Report { files, a, b, out } => cmd_report(files, a, b, out.as_ref()),
    }
}

/// Process exit code for a command outcome.
pub fn exit_code(result: &Result<()>) -> i32 {
    match result {
        Ok(()) => 0,
        Err(e) if e.is_usage() => 2,
        Err(_) => 1,
    }
}
