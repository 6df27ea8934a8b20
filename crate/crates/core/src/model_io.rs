//! Versioned JSON model files with an integrity checksum.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fire::SketchEnsemble;
use crate::fire1::ProjectionEnsemble;

pub const MODEL_MAGIC: &str = "firehash-model";
pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Fire(SketchEnsemble),
    Fire1(ProjectionEnsemble),
}

impl Model {
    fn kind(&self) -> &'static str {
        match self {
            Model::Fire(_) => "fire",
            Model::Fire1(_) => "fire1",
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    magic: String,
    format_version: u64,
    kind: String,
    checksum: String,
    payload: Value,
}

fn checksum(payload: &Value) -> String {
    // Value objects serialize with sorted keys, so this is canonical.
    let canonical = serde_json::to_string(payload).expect("JSON values always serialize");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

pub fn model_to_string(model: &Model) -> Result<String> {
    let payload = match model {
        Model::Fire(m) => serde_json::to_value(m),
        Model::Fire1(m) => serde_json::to_value(m),
    }
    .map_err(|e| Error::ModelTruncated(e.to_string()))?;
    let env = Envelope {
        magic: MODEL_MAGIC.into(),
        format_version: FORMAT_VERSION,
        kind: model.kind().into(),
        checksum: checksum(&payload),
        payload,
    };
    let mut s = serde_json::to_string_pretty(&env).map_err(|e| Error::ModelTruncated(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn model_from_str(text: &str) -> Result<Model> {
    let raw: Value = serde_json::from_str(text).map_err(|e| Error::ModelTruncated(e.to_string()))?;
    match raw.get("magic").and_then(Value::as_str) {
        Some(MODEL_MAGIC) => {}
        other => return Err(Error::ModelVersion(format!("bad magic {other:?}"))),
    }
    match raw.get("format_version").and_then(Value::as_u64) {
        Some(FORMAT_VERSION) => {}
        other => {
            return Err(Error::ModelVersion(format!(
                "unsupported format_version {other:?}, expected {FORMAT_VERSION}"
            )))
        }
    }
    let env: Envelope = serde_json::from_value(raw).map_err(|e| Error::ModelTruncated(e.to_string()))?;
    let computed = checksum(&env.payload);
    if computed != env.checksum {
        return Err(Error::ModelChecksum {
            stored: env.checksum,
            computed,
        });
    }
    let bad = |e: serde_json::Error| Error::ModelTruncated(e.to_string());
    match env.kind.as_str() {
        "fire" => Ok(Model::Fire(serde_json::from_value(env.payload).map_err(bad)?)),
        "fire1" => Ok(Model::Fire1(serde_json::from_value(env.payload).map_err(bad)?)),
        other => Err(Error::ModelVersion(format!("unknown model kind {other:?}"))),
    }
}

pub fn save_model(path: impl AsRef<Path>, model: &Model) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model_to_string(model)?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_str(&text)
}
