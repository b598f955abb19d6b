//! File formats, image IO and command-line pipelines around
//! [`milattn_core`].
//!
//! The core crate holds every algorithm; this crate reads and writes PNG
//! slides, binary embedding stores and checkpoints, CSV imports, JSON
//! manifests/configs and reports, and wires them into the `milattn` binary.

pub mod checkpoint_io;
pub mod cli;
pub mod config;
pub mod error;
pub mod imageio;
pub mod manifest;
pub mod report;
pub mod store_io;
pub mod synth;

pub use error::{Error, Result};
pub use milattn_core as core;
