//! Model archive: one JSON document holding the run configuration and the
//! trained ensemble, guarded by a SHA-256 checksum of the payload.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::ensemble::CbfModel;
use crate::error::{Error, Result};

use super::config::RunConfig;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchivePayload {
    pub config: RunConfig,
    pub model: CbfModel<f64>,
}

fn checksum(payload: &Value) -> String {
    // `Value` keeps object keys sorted, so the text is canonical.
    let text = serde_json::to_string(payload).expect("a JSON value always serializes");
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn to_json(payload: &ArchivePayload) -> Result<String> {
    let value = serde_json::to_value(payload).map_err(|e| Error::Archive(e.to_string()))?;
    let doc = serde_json::json!({
        "format_version": FORMAT_VERSION,
        "checksum": checksum(&value),
        "payload": value,
    });
    serde_json::to_string_pretty(&doc).map_err(|e| Error::Archive(e.to_string()))
}

pub fn from_json(text: &str) -> Result<ArchivePayload> {
    let mut doc: Value = serde_json::from_str(text).map_err(|e| Error::Archive(format!("not a model archive: {e}")))?;
    let version = doc.get("format_version").and_then(Value::as_u64);
    if version != Some(FORMAT_VERSION as u64) {
        return Err(Error::Archive(format!("unsupported format_version {version:?}")));
    }
    let expected = doc
        .get("checksum")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Archive("missing checksum".into()))?
        .to_string();
    let payload = doc
        .get_mut("payload")
        .map(Value::take)
        .ok_or_else(|| Error::Archive("missing payload".into()))?;
    let computed = checksum(&payload);
    if computed != expected {
        return Err(Error::Checksum { expected, computed });
    }
    let payload: ArchivePayload = serde_json::from_value(payload).map_err(|e| Error::Archive(e.to_string()))?;
    payload.model.validate().map_err(|e| Error::Archive(e.to_string()))?;
    Ok(payload)
}

pub fn save(path: impl AsRef<Path>, payload: &ArchivePayload) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_json(payload)?).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load(path: impl AsRef<Path>) -> Result<ArchivePayload> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    from_json(&text)
}
