//! Attention-pooled multiple-instance learning (MIL) for weakly supervised
//! slide scoring.
//!
//! A slide is represented by a bag of patch embeddings. The [`milhead`]
//! attention head scores every instance, pools the bag into one vector with
//! softmax weights and classifies it into one of four HER2 grades. The same
//! attention weights drive patch-level heatmaps in [`slidescore`].
//!
//! This crate is `no_std` and only needs `alloc`. File formats are exposed as
//! byte encoders/decoders; reading and writing files is left to the caller.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod embed;
pub mod error;
pub mod evalkit;
pub mod milhead;
pub mod numerics;
pub mod slidelab;
pub mod slidescore;
pub mod trainer;

pub use error::{Error, Result};

/// Number of HER2 grades (scores 0, 1, 2 and 3).
pub const HER2_CLASSES: usize = 4;
