//! Checkpoint files with a JSON sidecar describing how they were produced.

use std::path::{Path, PathBuf};

use milattn_core::milhead::{decode_checkpoint, encode_checkpoint, MilParams};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imageio::{read_file, write_file};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub attention_dim: usize,
    pub embed_dim: usize,
    pub classes: usize,
    /// Free-form provenance: config, fold, best epoch and so on.
    #[serde(default)]
    pub info: serde_json::Value,
}

/// `fold_0.milc` → `fold_0.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub fn save_checkpoint(params: &MilParams, path: &Path, info: serde_json::Value) -> Result<()> {
    write_file(path, &encode_checkpoint(params))?;
    let meta = CheckpointMeta {
        attention_dim: params.attention_dim(),
        embed_dim: params.embed_dim(),
        classes: params.classes(),
        info,
    };
    let json = serde_json::to_vec_pretty(&meta).expect("metadata serializes");
    write_file(&sidecar_path(path), &json)
}

pub fn load_checkpoint(path: &Path) -> Result<MilParams> {
    let bytes = read_file(path)?;
    decode_checkpoint(&bytes).map_err(|e| Error::at(path, e))
}

/// Loads a checkpoint and checks it accepts embeddings of `embed_dim`.
pub fn load_checkpoint_for(path: &Path, embed_dim: usize) -> Result<MilParams> {
    let params = load_checkpoint(path)?;
    if params.embed_dim() != embed_dim {
        return Err(Error::at(
            path,
            milattn_core::Error::DimMismatch {
                what: "checkpoint embedding dim",
                expected: embed_dim,
                found: params.embed_dim(),
            },
        ));
    }
    Ok(params)
}

pub fn read_sidecar(path: &Path) -> Result<CheckpointMeta> {
    let side = sidecar_path(path);
    let bytes = read_file(&side)?;
    serde_json::from_slice(&bytes).map_err(|source| Error::Json { path: side, source })
}
