use alloc::string::String;
use alloc::vec::Vec;

use crate::embed::EmbeddingStore;
use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

/// A bag of `N ≥ 1` patch embeddings drawn from one slide.
#[derive(Debug, Clone, PartialEq)]
pub struct Bag {
    slide_id: String,
    label: Option<usize>,
    locations: Vec<(u32, u32)>,
    /// `N × M`, promoted to double precision.
    embeddings: DenseMatrix,
}

impl Bag {
    pub fn new(
        slide_id: impl Into<String>,
        label: Option<usize>,
        locations: Vec<(u32, u32)>,
        embeddings: DenseMatrix,
    ) -> Result<Self> {
        if embeddings.rows() == 0 {
            return Err(Error::EmptyInput("bag"));
        }
        if locations.len() != embeddings.rows() {
            return Err(Error::DimMismatch {
                what: "bag locations",
                expected: embeddings.rows(),
                found: locations.len(),
            });
        }
        Ok(Self {
            slide_id: slide_id.into(),
            label,
            locations,
            embeddings,
        })
    }

    /// Gathers the store entries at `indices` (repeats allowed).
    pub fn from_store(store: &EmbeddingStore, label: Option<usize>, indices: &[usize]) -> Result<Self> {
        let dim = store.dim();
        let mut data = Vec::with_capacity(indices.len() * dim);
        let mut locations = Vec::with_capacity(indices.len());
        for &i in indices {
            let entry = store.get(i).ok_or(Error::IndexOutOfRange {
                index: i,
                len: store.len(),
            })?;
            locations.push((entry.x, entry.y));
            data.extend(entry.embedding.values().iter().map(|&v| f64::from(v)));
        }
        let embeddings = DenseMatrix::from_vec(indices.len(), dim, data)?;
        Self::new(store.slide_id(), label, locations, embeddings)
    }

    pub fn slide_id(&self) -> &str {
        &self.slide_id
    }

    pub fn label(&self) -> Option<usize> {
        self.label
    }

    pub fn len(&self) -> usize {
        self.embeddings.rows()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.embeddings.cols()
    }

    pub fn locations(&self) -> &[(u32, u32)] {
        &self.locations
    }

    pub fn embeddings(&self) -> &DenseMatrix {
        &self.embeddings
    }

    pub fn instance(&self, k: usize) -> &[f64] {
        self.embeddings.row(k)
    }

    /// Reorders instances so that instance `k` of the result is instance
    /// `order[k]` of `self`. Panics if `order` is not a permutation.
    pub fn permuted(&self, order: &[usize]) -> Bag {
        assert_eq!(order.len(), self.len());
        let mut data = Vec::with_capacity(self.len() * self.dim());
        let mut locations = Vec::with_capacity(self.len());
        for &k in order {
            data.extend_from_slice(self.instance(k));
            locations.push(self.locations[k]);
        }
        Bag {
            slide_id: self.slide_id.clone(),
            label: self.label,
            locations,
            embeddings: DenseMatrix::from_vec(self.len(), self.dim(), data).expect("same shape"),
        }
    }
}
