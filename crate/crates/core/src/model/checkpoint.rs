//! Versioned JSON weight files. Floats are written in shortest round-trip form
//! and parsed with correct rounding, so a save/load cycle is bit-exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Ensemble, MlpModel};
use crate::error::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "uq-curate/checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    format: String,
    version: u32,
    payload: T,
}

fn to_json<T: Serialize>(payload: &T) -> Result<String> {
    Ok(serde_json::to_string(&Envelope {
        format: CHECKPOINT_FORMAT.to_string(),
        version: CHECKPOINT_VERSION,
        payload,
    })?)
}

fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    let env: Envelope<T> = serde_json::from_str(text)?;
    if env.format != CHECKPOINT_FORMAT || env.version != CHECKPOINT_VERSION {
        return Err(Error::Argument(format!(
            "unsupported checkpoint {} v{}",
            env.format, env.version
        )));
    }
    Ok(env.payload)
}

pub fn model_to_json(model: &MlpModel) -> Result<String> {
    to_json(model)
}

pub fn model_from_json(text: &str) -> Result<MlpModel> {
    from_json(text)
}

pub fn save_model(model: &MlpModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model_to_json(model)?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<MlpModel> {
    let path = path.as_ref();
    model_from_json(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

pub fn save_ensemble(ensemble: &Ensemble, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_json(ensemble)?).map_err(|e| Error::io(path, e))
}

pub fn load_ensemble(path: impl AsRef<Path>) -> Result<Ensemble> {
    let path = path.as_ref();
    from_json(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}
