//! Versioned JSON report envelopes.

use serde::Serialize;

use crate::config::Config;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct Envelope<'a, T> {
    schema_version: u32,
    kind: &'a str,
    seed: u64,
    config_hash: String,
    #[serde(flatten)]
    payload: &'a T,
}

/// Pretty JSON with `schema_version`, `kind`, `seed` and `config_hash` ahead of the payload fields.
pub fn render<T: Serialize>(kind: &str, cfg: &Config, payload: &T) -> String {
    render_with(kind, cfg.seed, &cfg.hash(), payload)
}

/// As [`render`], for reports about a saved model: pass the model's seed and config hash.
pub fn render_with<T: Serialize>(kind: &str, seed: u64, config_hash: &str, payload: &T) -> String {
    let env = Envelope { schema_version: SCHEMA_VERSION, kind, seed, config_hash: config_hash.to_string(), payload };
    let mut s = serde_json::to_string_pretty(&env).expect("reports serialise");
    s.push('\n');
    s
}
