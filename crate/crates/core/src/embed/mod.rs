//! The frozen patch-embedding stage: embeddings, per-slide stores, the
//! built-in histogram embedder and the binary store layout.

mod format;
mod store;
mod toy;

pub use format::{decode_store, encode_store, encoded_store_len, STORE_MAGIC, STORE_VERSION};
pub use store::{Embedding, EmbeddingStore, StoreEntry};
pub use toy::{toy_embed, TOY_BINS_PER_CHANNEL, TOY_DIM};
