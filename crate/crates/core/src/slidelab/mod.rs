//! Slide ingestion primitives: HSV tissue masking, patch-grid extraction and
//! patch augmentation. Everything here is deterministic except
//! [`augment_patch`], which draws from the stream it is given.

mod augment;
mod hsv;
mod image;
mod mask;

pub use augment::{augment_patch, AugmentConfig, Interval};
pub use hsv::{hsv_to_rgb, rgb_to_hsv};
pub use image::{extract_patch, PatchPixels, PatchRef, SlideImage};
pub use mask::{tissue_mask, MaskConfig, TissueMask, TissueThresholds};
