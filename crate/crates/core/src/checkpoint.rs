//! Trained-classifier files: `SCFK` magic, `u32` version, `u64` payload
//! length (all little-endian), then a JSON payload whose floats round-trip
//! exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Result, ScfError};
use crate::trainer::{AdamState, Classifier, ClassifierParams, History};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"SCFK";
pub const CHECKPOINT_VERSION: u32 = 1;
const HEADER_LEN: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub classifier: ClassifierParams,
    pub optimizer: AdamState,
    pub config: RunConfig,
    pub history: History,
}

impl Checkpoint {
    pub fn classifier(&self) -> Result<Classifier> {
        Classifier::from_params(self.classifier.clone())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let payload =
            serde_json::to_vec(self).map_err(|e| ScfError::input(format!("checkpoint does not serialize: {e}")))?;
        let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
        out.extend_from_slice(&payload);
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(ScfError::input(format!(
                "checkpoint header needs {HEADER_LEN} bytes, found {}",
                bytes.len()
            )));
        }
        if &bytes[..4] != CHECKPOINT_MAGIC {
            return Err(ScfError::input("not a checkpoint (bad magic)"));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
        if version != CHECKPOINT_VERSION {
            return Err(ScfError::input(format!(
                "unsupported checkpoint version {version} (expected {CHECKPOINT_VERSION})"
            )));
        }
        let len = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
        let payload = &bytes[HEADER_LEN..];
        if payload.len() as u64 != len {
            return Err(ScfError::input(format!(
                "checkpoint payload at offset {HEADER_LEN}: expected {len} bytes, found {}",
                payload.len()
            )));
        }
        serde_json::from_slice(payload).map_err(|e| ScfError::input(format!("checkpoint payload: {e}")))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()?).map_err(|e| ScfError::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| ScfError::io(path, e))?;
        Self::from_bytes(&bytes).map_err(|e| match e {
            ScfError::Input(msg) => ScfError::input(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}
