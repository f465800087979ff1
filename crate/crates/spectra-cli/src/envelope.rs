//! Result envelope: configuration hash, version, command, and the payload.
//! Identical configuration and version produce a byte-identical envelope and
//! payload regardless of worker count; wall time goes to stderr only.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultEnvelope {
    pub config_hash: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    /// "csv" or "json".
    pub payload_kind: String,
    pub payload: serde_json::Value,
}

impl ResultEnvelope {
    /// The raw payload bytes written to `--out`: CSV text as-is, JSON
    /// canonically serialized.
    pub fn payload_bytes(&self) -> Vec<u8> {
        match &self.payload {
            serde_json::Value::String(s) if self.payload_kind == "csv" => s.clone().into_bytes(),
            v => serde_json::to_vec(v).expect("payload serializes"),
        }
    }
}
