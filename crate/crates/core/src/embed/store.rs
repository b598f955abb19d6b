use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// One patch feature vector, stored in single precision.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Embedding(Vec<f32>);

impl Embedding {
    pub fn new(values: Vec<f32>) -> Result<Self> {
        if values.iter().all(|v| v.is_finite()) {
            Ok(Self(values))
        } else {
            Err(Error::NonFinite("embedding"))
        }
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f32] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoreEntry {
    pub x: u32,
    pub y: u32,
    pub embedding: Embedding,
}

/// All embeddings of one slide, keyed by patch top-left coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    slide_id: String,
    dim: usize,
    entries: Vec<StoreEntry>,
    seen: BTreeSet<(u32, u32)>,
}

impl EmbeddingStore {
    pub fn new(slide_id: impl Into<String>, dim: usize) -> Self {
        Self {
            slide_id: slide_id.into(),
            dim,
            entries: Vec::new(),
            seen: BTreeSet::new(),
        }
    }

    pub fn slide_id(&self) -> &str {
        &self.slide_id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[StoreEntry] {
        &self.entries
    }

    pub fn get(&self, index: usize) -> Option<&StoreEntry> {
        self.entries.get(index)
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        self.seen.contains(&(x, y))
    }

    pub fn push(&mut self, x: u32, y: u32, embedding: Embedding) -> Result<()> {
        if embedding.dim() != self.dim {
            return Err(Error::DimMismatch {
                what: "embedding",
                expected: self.dim,
                found: embedding.dim(),
            });
        }
        if !self.seen.insert((x, y)) {
            return Err(Error::DuplicateCoordinate { x, y });
        }
        self.entries.push(StoreEntry { x, y, embedding });
        Ok(())
    }
}
