//! Plain-text `key = value` run configuration. Every key has a documented
//! default; unknown keys are rejected with the list of valid ones.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::curation::{LoopConfig, NAle, Selector};
use crate::data::{SplitSpec, SyntheticSpec};
use crate::error::{Error, Result};
use crate::model::{Head, ModelConfig};
use crate::nn::AdamConfig;
use crate::pipeline::{UncertaintySource, UqMethod, UqSetup};

/// `(key, default, description)` for every accepted key.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("seed", "0", "master seed; every other seed is derived from it"),
    ("data.path", "", "feature CSV to load; empty means generate synthetic data"),
    ("synthetic.n_instances", "2000", "number of synthetic instances"),
    ("synthetic.feature_dim", "20", "synthetic feature dimension"),
    ("synthetic.separation", "2.0", "distance between the two class means"),
    ("synthetic.imbalance", "4.0", "negatives per positive"),
    ("synthetic.noisy_fraction", "0.3", "share of instances that are noise-tagged"),
    ("synthetic.flip_probability", "0.5", "label flip probability for noisy instances"),
    ("synthetic.noise_scale", "2.0", "feature noise scale for noisy instances"),
    ("split.train_fraction", "0.8", "train+validation share; the rest is test"),
    ("split.val_fraction", "0.1", "validation share of the train+validation part"),
    ("model.head", "hetero", "output head: homo | hetero"),
    ("model.hidden_layers", "3", "number of hidden layers"),
    ("model.hidden_width", "300", "neurons per hidden layer"),
    ("model.dropout", "0.1", "dropout probability after each hidden layer"),
    ("model.max_epochs", "200", "epoch cap"),
    ("model.patience", "5", "early-stopping patience in epochs"),
    ("model.batch_size", "64", "minibatch size"),
    ("model.s_logit", "50", "logit samples for the Gaussian-logit head"),
    ("model.learning_rate", "0.001", "Adam learning rate"),
    ("model.beta1", "0.9", "Adam first-moment decay"),
    ("model.beta2", "0.999", "Adam second-moment decay"),
    ("model.epsilon", "1e-8", "Adam denominator constant"),
    ("uq.method", "ensemble", "vanilla | mc-dropout | ensemble"),
    ("uq.ensemble_size", "5", "ensemble members"),
    ("uq.mc_passes", "30", "stochastic passes for MC-dropout"),
    ("uq.source", "auto", "uncertainty pair for curation: auto | entropy | hetero"),
    ("experiment.repetitions", "10", "independent repetitions per grid cell"),
    ("experiment.methods", "vanilla,mc-dropout,ensemble", "UQ methods compared by the shift study"),
    ("experiment.intensities", "0,0.1,0.2,0.3,0.4", "shift intensities (feature noise std)"),
    ("experiment.shift_partitions", "train,val,test", "partitions that receive shift noise"),
    ("experiment.growth_fractions", "0.6,0.8,1.0", "nested training fractions for the growth study"),
    ("experiment.selectors", "ehal,elah,random", "selectors compared by the curation study"),
    ("experiment.checkpoint", "0.4", "pool fraction at which selectors are compared"),
    ("curation.seed_fraction", "0.2", "initial training share (validation carved from it)"),
    ("curation.pool_fraction", "0.6", "candidate pool share; the rest is test"),
    ("curation.tranche_fraction", "0.1", "tranche size per round as a share of the pool"),
    ("curation.val_fraction", "0.1", "validation share of the initial training set"),
    ("curation.max_rounds", "0", "round cap; 0 runs until the pool is exhausted"),
    ("curation.n_ale", "0.1", "aleatoric rejection set size: integer count or fraction"),
];

fn valid_keys() -> String {
    KEYS.iter().map(|(k, _, _)| *k).collect::<Vec<_>>().join(", ")
}

/// Raw key/value settings with defaults filled in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            values: KEYS.iter().map(|(k, v, _)| (k.to_string(), v.to_string())).collect(),
        }
    }
}

impl Settings {
    /// Defaults overridden by the assignments in `text`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Self::default();
        let mut seen = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line_no = k + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            if let Some(prev) = seen.insert(key.to_string(), line_no) {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("duplicate key `{key}` (first set on line {prev})"),
                });
            }
            s.set(key, value.trim())?;
        }
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| e.context(format!("config {}", path.display())))
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match self.values.get_mut(key) {
            Some(slot) => {
                *slot = value.to_string();
                Ok(())
            }
            None => Err(Error::UnknownKey {
                key: key.to_string(),
                valid: valid_keys(),
            }),
        }
    }

    pub fn get(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    /// Every key with its effective value, in key order.
    pub fn resolved(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    /// The resolved settings in the same `key = value` syntax they are read from.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.values {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    fn typed<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.get(key);
        raw.parse::<T>()
            .map_err(|e| Error::Config(format!("{key} = `{raw}`: {e}")))
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<T>().map_err(|e| Error::Config(format!("{key}: `{s}`: {e}"))))
            .collect()
    }
}

/// Where the instances come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Synthetic(SyntheticSpec),
    Csv(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShiftPartitions {
    pub train: bool,
    pub val: bool,
    pub test: bool,
}

impl FromStr for ShiftPartitions {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut p = ShiftPartitions {
            train: false,
            val: false,
            test: false,
        };
        for part in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            match part {
                "train" => p.train = true,
                "val" => p.val = true,
                "test" => p.test = true,
                other => return Err(Error::Config(format!("unknown partition `{other}` (expected train|val|test)"))),
            }
        }
        Ok(p)
    }
}

/// Typed view of [`Settings`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub data: DataSource,
    pub split: SplitSpec,
    /// `model.input_dim` is 0 until a dataset is bound via [`RunConfig::bind_input_dim`].
    pub uq: UqSetup,
    pub source: UncertaintySource,
    pub repetitions: usize,
    pub methods: Vec<UqMethod>,
    pub intensities: Vec<f64>,
    pub shift_partitions: ShiftPartitions,
    pub growth_fractions: Vec<f64>,
    pub selectors: Vec<Selector>,
    pub checkpoint: f64,
    pub curation: LoopConfig,
}

impl RunConfig {
    pub fn from_settings(s: &Settings) -> Result<Self> {
        let seed: u64 = s.typed("seed")?;
        let data = match s.get("data.path") {
            "" => DataSource::Synthetic(SyntheticSpec {
                n_instances: s.typed("synthetic.n_instances")?,
                feature_dim: s.typed("synthetic.feature_dim")?,
                separation: s.typed("synthetic.separation")?,
                imbalance: s.typed("synthetic.imbalance")?,
                noisy_fraction: s.typed("synthetic.noisy_fraction")?,
                flip_probability: s.typed("synthetic.flip_probability")?,
                noise_scale: s.typed("synthetic.noise_scale")?,
                seed,
            }),
            path => DataSource::Csv(PathBuf::from(path)),
        };
        let model = ModelConfig {
            input_dim: 0,
            hidden_layers: s.typed("model.hidden_layers")?,
            hidden_width: s.typed("model.hidden_width")?,
            dropout: s.typed("model.dropout")?,
            head: s.typed::<Head>("model.head")?,
            adam: AdamConfig {
                learning_rate: s.typed("model.learning_rate")?,
                beta1: s.typed("model.beta1")?,
                beta2: s.typed("model.beta2")?,
                epsilon: s.typed("model.epsilon")?,
            },
            max_epochs: s.typed("model.max_epochs")?,
            patience: s.typed("model.patience")?,
            batch_size: s.typed("model.batch_size")?,
            s_logit: s.typed("model.s_logit")?,
        };
        let mut uq = UqSetup::new(s.typed("uq.method")?, model);
        uq.ensemble_size = s.typed("uq.ensemble_size")?;
        uq.mc_passes = s.typed("uq.mc_passes")?;
        let source: UncertaintySource = s.typed("uq.source")?;
        let max_rounds: usize = s.typed("curation.max_rounds")?;
        let cfg = RunConfig {
            seed,
            data,
            split: SplitSpec {
                train_fraction: s.typed("split.train_fraction")?,
                val_fraction: s.typed("split.val_fraction")?,
                seed,
            },
            curation: LoopConfig {
                seed_fraction: s.typed("curation.seed_fraction")?,
                pool_fraction: s.typed("curation.pool_fraction")?,
                tranche_fraction: s.typed("curation.tranche_fraction")?,
                val_fraction: s.typed("curation.val_fraction")?,
                max_rounds: (max_rounds > 0).then_some(max_rounds),
                n_ale: s.typed::<NAle>("curation.n_ale")?,
                source,
                uq: uq.clone(),
            },
            uq,
            source,
            repetitions: s.typed("experiment.repetitions")?,
            methods: s.list("experiment.methods")?,
            intensities: s.list("experiment.intensities")?,
            shift_partitions: s.typed("experiment.shift_partitions")?,
            growth_fractions: s.list("experiment.growth_fractions")?,
            selectors: s.list("experiment.selectors")?,
            checkpoint: s.typed("experiment.checkpoint")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::Config("experiment.repetitions must be >= 1".into()));
        }
        if self.intensities.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::Config("experiment.intensities must be finite and >= 0".into()));
        }
        if self.growth_fractions.iter().any(|&f| !(f > 0.0 && f <= 1.0)) {
            return Err(Error::Config("experiment.growth_fractions must lie in (0, 1]".into()));
        }
        if !(self.checkpoint > 0.0 && self.checkpoint <= 1.0) {
            return Err(Error::Config("experiment.checkpoint must lie in (0, 1]".into()));
        }
        if let DataSource::Synthetic(spec) = &self.data {
            spec.validate()?;
        }
        if self.uq.ensemble_size == 0 || self.uq.mc_passes == 0 {
            return Err(Error::Config("uq.ensemble_size and uq.mc_passes must be >= 1".into()));
        }
        Ok(())
    }

    /// Sets the model input dimension once the data is known.
    pub fn bind_input_dim(&mut self, dim: usize) {
        self.uq.model.input_dim = dim;
        self.curation.uq.model.input_dim = dim;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve() {
        let cfg = RunConfig::from_settings(&Settings::default()).unwrap();
        assert_eq!(cfg.repetitions, 10);
        assert_eq!(cfg.intensities, vec![0.0, 0.1, 0.2, 0.3, 0.4]);
        assert_eq!(cfg.methods, UqMethod::ALL.to_vec());
        assert_eq!(cfg.uq.model.hidden_width, 300);
        assert!(matches!(cfg.data, DataSource::Synthetic(ref s) if *s == SyntheticSpec::default()));
        assert_eq!(cfg.curation.n_ale, NAle::Fraction(0.1));
        assert_eq!(cfg.curation.max_rounds, None);
    }

    #[test]
    fn every_key_has_a_default_that_parses() {
        let text: String = KEYS.iter().map(|(k, v, _)| format!("{k} = {v}\n")).collect();
        assert_eq!(Settings::parse(&text).unwrap(), Settings::default());
    }

    #[test]
    fn unknown_key_lists_valid_keys() {
        match Settings::parse("seed = 1\nbogus = 3\n") {
            Err(Error::UnknownKey { key, valid }) => {
                assert_eq!(key, "bogus");
                assert!(valid.contains("model.hidden_width"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_and_duplicate_lines_name_the_line() {
        assert!(matches!(Settings::parse("# c\nseed 3\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(Settings::parse("seed = 1\nseed = 2\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn overrides_and_comments() {
        let s = Settings::parse("seed = 9 # trailing\nmodel.head = homo\ncuration.n_ale = 3\n").unwrap();
        let cfg = RunConfig::from_settings(&s).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.uq.model.head, Head::Homoscedastic);
        assert_eq!(cfg.curation.n_ale, NAle::Count(3));
        assert_eq!(Settings::parse(&s.to_text()).unwrap(), s);
    }

    #[test]
    fn bad_values_are_config_errors() {
        let s = Settings::parse("experiment.repetitions = 0\n").unwrap();
        assert!(matches!(RunConfig::from_settings(&s), Err(Error::Config(_))));
        let s = Settings::parse("uq.method = magic\n").unwrap();
        assert!(RunConfig::from_settings(&s).unwrap_err().is_usage());
    }
}
