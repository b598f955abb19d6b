use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::hsv::rgb_to_hsv;
use super::image::{PatchRef, SlideImage};
use crate::error::{Error, Result};

/// HSV thresholds deciding which pixels count as tissue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TissueThresholds {
    pub min_saturation: f64,
    pub min_value: f64,
    pub max_value: f64,
    /// Fraction of tissue pixels a cell needs to be eligible.
    pub min_tissue_fraction: f64,
}

impl Default for TissueThresholds {
    fn default() -> Self {
        Self {
            min_saturation: 0.07,
            min_value: 0.10,
            max_value: 0.95,
            min_tissue_fraction: 0.5,
        }
    }
}

impl TissueThresholds {
    /// White background has low saturation; very dark pixels are artifacts.
    pub fn is_tissue(&self, rgb: [u8; 3]) -> bool {
        let (_, s, v) = rgb_to_hsv(rgb[0], rgb[1], rgb[2]);
        s >= self.min_saturation && v >= self.min_value && v <= self.max_value
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaskConfig {
    pub patch_size: u32,
    /// Grid step in pixels; `None` means non-overlapping (`stride = patch_size`).
    pub stride: Option<u32>,
    pub thresholds: TissueThresholds,
}

impl Default for MaskConfig {
    fn default() -> Self {
        Self {
            patch_size: 224,
            stride: None,
            thresholds: TissueThresholds::default(),
        }
    }
}

impl MaskConfig {
    pub fn with_patch_size(patch_size: u32) -> Self {
        Self {
            patch_size,
            ..Self::default()
        }
    }

    pub fn stride(&self) -> u32 {
        self.stride.unwrap_or(self.patch_size)
    }
}

/// Patch-grid eligibility. Cell `(col, row)` covers the square whose top-left
/// pixel is `(col · stride, row · stride)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TissueMask {
    cols: u32,
    rows: u32,
    stride: u32,
    patch_size: u32,
    cells: Vec<bool>,
}

impl TissueMask {
    pub fn cols(&self) -> u32 {
        self.cols
    }

    pub fn rows(&self) -> u32 {
        self.rows
    }

    pub fn stride(&self) -> u32 {
        self.stride
    }

    pub fn patch_size(&self) -> u32 {
        self.patch_size
    }

    pub fn is_eligible(&self, col: u32, row: u32) -> bool {
        self.cells[(row * self.cols + col) as usize]
    }

    pub fn eligible_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    /// Pixel coordinates of the top-left corner of every eligible cell, in
    /// row-major grid order.
    pub fn eligible_coords(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let (cols, stride) = (self.cols, self.stride);
        self.cells.iter().enumerate().filter(|(_, &c)| c).map(move |(i, _)| {
            let i = i as u32;
            ((i % cols) * stride, (i / cols) * stride)
        })
    }

    pub fn eligible_refs(&self, slide_id: &str) -> Vec<PatchRef> {
        self.eligible_coords()
            .map(|(x, y)| PatchRef {
                slide_id: slide_id.into(),
                x,
                y,
                size: self.patch_size,
            })
            .collect()
    }
}

/// Marks each patch-grid cell whose tissue-pixel fraction reaches the threshold.
pub fn tissue_mask(slide: &SlideImage, cfg: &MaskConfig) -> Result<TissueMask> {
    let size = cfg.patch_size;
    let stride = cfg.stride();
    if size == 0 || stride == 0 || size > slide.width().min(slide.height()) {
        return Err(Error::PatchTooLarge {
            size,
            width: slide.width(),
            height: slide.height(),
        });
    }
    let cols = (slide.width() - size) / stride + 1;
    let rows = (slide.height() - size) / stride + 1;

    // Per-pixel predicate once, then a summed-area table for the cell counts.
    let w = slide.width() as usize;
    let h = slide.height() as usize;
    let mut integral = alloc::vec![0u32; (w + 1) * (h + 1)];
    for y in 0..h {
        let mut row_sum = 0u32;
        for x in 0..w {
            row_sum += u32::from(cfg.thresholds.is_tissue(slide.pixel(x as u32, y as u32)));
            integral[(y + 1) * (w + 1) + x + 1] = integral[y * (w + 1) + x + 1] + row_sum;
        }
    }
    let needed = cfg.thresholds.min_tissue_fraction * f64::from(size) * f64::from(size);
    let mut cells = Vec::with_capacity((cols * rows) as usize);
    for row in 0..rows {
        for col in 0..cols {
            let (x0, y0) = ((col * stride) as usize, (row * stride) as usize);
            let (x1, y1) = (x0 + size as usize, y0 + size as usize);
            let count = integral[y1 * (w + 1) + x1] + integral[y0 * (w + 1) + x0]
                - integral[y0 * (w + 1) + x1]
                - integral[y1 * (w + 1) + x0];
            cells.push(f64::from(count) >= needed);
        }
    }
    Ok(TissueMask {
        cols,
        rows,
        stride,
        patch_size: size,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const PINK: [u8; 3] = [220, 120, 180];
    const WHITE: [u8; 3] = [255, 255, 255];

    #[test]
    fn white_slide_has_no_tissue() {
        let slide = SlideImage::from_fn(64, 64, 0.5, |_, _| WHITE).unwrap();
        let mask = tissue_mask(&slide, &MaskConfig::with_patch_size(16)).unwrap();
        assert_eq!((mask.cols(), mask.rows()), (4, 4));
        assert_eq!(mask.eligible_count(), 0);
    }

    #[test]
    fn pink_slide_is_all_tissue() {
        let slide = SlideImage::from_fn(64, 48, 0.5, |_, _| PINK).unwrap();
        let mask = tissue_mask(&slide, &MaskConfig::with_patch_size(16)).unwrap();
        assert_eq!(mask.eligible_count(), 12);
    }

    #[test]
    fn half_and_half() {
        let slide = SlideImage::from_fn(64, 32, 0.5, |x, _| if x < 32 { WHITE } else { PINK }).unwrap();
        let mask = tissue_mask(&slide, &MaskConfig::with_patch_size(16)).unwrap();
        for row in 0..mask.rows() {
            for col in 0..mask.cols() {
                assert_eq!(mask.is_eligible(col, row), col >= 2);
            }
        }
        let coords: Vec<_> = mask.eligible_coords().collect();
        assert_eq!(coords, alloc::vec![(32, 0), (48, 0), (32, 16), (48, 16)]);
    }

    #[test]
    fn dark_pixels_are_not_tissue() {
        let t = TissueThresholds::default();
        assert!(!t.is_tissue([10, 2, 5]));
        assert!(t.is_tissue(PINK));
        assert!(!t.is_tissue([240, 240, 238]));
    }

    #[test]
    fn fraction_threshold_boundary() {
        // exactly half of each 4x4 cell is pink
        let slide = SlideImage::from_fn(8, 8, 0.5, |x, _| if x % 4 < 2 { PINK } else { WHITE }).unwrap();
        let mut cfg = MaskConfig::with_patch_size(4);
        assert_eq!(tissue_mask(&slide, &cfg).unwrap().eligible_count(), 4);
        cfg.thresholds.min_tissue_fraction = 0.51;
        assert_eq!(tissue_mask(&slide, &cfg).unwrap().eligible_count(), 0);
    }

    #[test]
    fn overlapping_stride() {
        let slide = SlideImage::from_fn(10, 10, 0.5, |_, _| PINK).unwrap();
        let cfg = MaskConfig {
            patch_size: 4,
            stride: Some(2),
            ..MaskConfig::default()
        };
        let mask = tissue_mask(&slide, &cfg).unwrap();
        assert_eq!((mask.cols(), mask.rows()), (4, 4));
        assert!(mask.eligible_coords().all(|(x, y)| x + 4 <= 10 && y + 4 <= 10));
    }

    #[test]
    fn patch_larger_than_slide() {
        let slide = SlideImage::from_fn(8, 16, 0.5, |_, _| PINK).unwrap();
        assert!(matches!(
            tissue_mask(&slide, &MaskConfig::with_patch_size(9)),
            Err(Error::PatchTooLarge { .. })
        ));
    }
}
