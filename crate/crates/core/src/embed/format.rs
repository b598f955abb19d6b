//! Binary embedding-store layout (little-endian):
//!
//! | offset | field                       |
//! |--------|-----------------------------|
//! | 0      | magic `MILE`                |
//! | 4      | version `u32` = 1           |
//! | 8      | dim `u32`                   |
//! | 12     | reserved `u32`, always 0    |
//! | 16     | count `u64`                 |
//! | 24     | `count` × { x `u32`, y `u32`, dim × `f32` } |
//!
//! The reserved word keeps `count` 8-byte aligned. The slide id is not part
//! of the file; callers name the store when decoding.

use alloc::format;
use alloc::vec::Vec;

use super::{Embedding, EmbeddingStore};
use crate::error::{Error, Result};

pub const STORE_MAGIC: [u8; 4] = *b"MILE";
pub const STORE_VERSION: u32 = 1;
const HEADER_LEN: usize = 24;

pub fn encoded_store_len(dim: usize, count: usize) -> usize {
    HEADER_LEN + count * (8 + 4 * dim)
}

pub fn encode_store(store: &EmbeddingStore) -> Vec<u8> {
    let mut out = Vec::with_capacity(encoded_store_len(store.dim(), store.len()));
    out.extend_from_slice(&STORE_MAGIC);
    out.extend_from_slice(&STORE_VERSION.to_le_bytes());
    out.extend_from_slice(&(store.dim() as u32).to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    out.extend_from_slice(&(store.len() as u64).to_le_bytes());
    for e in store.entries() {
        out.extend_from_slice(&e.x.to_le_bytes());
        out.extend_from_slice(&e.y.to_le_bytes());
        for v in e.embedding.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"))
}

pub fn decode_store(bytes: &[u8], slide_id: &str) -> Result<EmbeddingStore> {
    if bytes.len() < 4 || bytes[..4] != STORE_MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::CorruptPayload(format!(
            "header truncated at {} bytes",
            bytes.len()
        )));
    }
    let version = u32_at(bytes, 4);
    if version != STORE_VERSION {
        return Err(Error::VersionUnsupported(version));
    }
    let dim = u32_at(bytes, 8) as usize;
    if u32_at(bytes, 12) != 0 {
        return Err(Error::CorruptPayload("reserved header word is not zero".into()));
    }
    let count = u64::from_le_bytes(bytes[16..24].try_into().expect("8 bytes"));
    let record = 8 + 4 * dim as u64;
    let expected = count.checked_mul(record).and_then(|n| n.checked_add(HEADER_LEN as u64));
    if expected != Some(bytes.len() as u64) {
        return Err(Error::CorruptPayload(format!(
            "{count} records of dim {dim} do not match a {}-byte file",
            bytes.len()
        )));
    }
    let mut store = EmbeddingStore::new(slide_id, dim);
    for rec in bytes[HEADER_LEN..].chunks_exact(record as usize) {
        let x = u32_at(rec, 0);
        let y = u32_at(rec, 4);
        let values: Vec<f32> = rec[8..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        let embedding = Embedding::new(values)
            .map_err(|_| Error::CorruptPayload(format!("non-finite value in record ({x}, {y})")))?;
        store.push(x, y, embedding)?;
    }
    Ok(store)
}
