//! Versioned JSON envelopes for trained models.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{LearnError, Result};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    format_version: u64,
    model: T,
}

/// Pretty-printed JSON with a `format_version` field.
pub fn to_json<T: Serialize>(model: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Envelope { format_version: FORMAT_VERSION, model })?;
    s.push('\n');
    Ok(s)
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    match value.get("format_version").and_then(|v| v.as_u64()) {
        Some(FORMAT_VERSION) => {}
        Some(v) => return Err(LearnError::UnsupportedVersion(v)),
        None => return Err(LearnError::InvalidParam("missing format_version".into())),
    }
    let env: Envelope<T> = serde_json::from_value(value)?;
    Ok(env.model)
}
