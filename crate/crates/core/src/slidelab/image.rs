use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A flat RGB slide stand-in. Pixels are row-major, three bytes per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct SlideImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
    microns_per_pixel: f64,
}

impl SlideImage {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>, microns_per_pixel: f64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!("empty image {width}x{height}")));
        }
        let expected = 3 * width as usize * height as usize;
        if pixels.len() != expected {
            return Err(Error::InvalidImage(format!(
                "pixel buffer has {} bytes, expected {expected}",
                pixels.len()
            )));
        }
        if !(microns_per_pixel.is_finite() && microns_per_pixel > 0.0) {
            return Err(Error::InvalidImage(format!(
                "microns per pixel must be positive, got {microns_per_pixel}"
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
            microns_per_pixel,
        })
    }

    /// Builds a slide by evaluating `color(x, y)` for every pixel.
    pub fn from_fn(
        width: u32,
        height: u32,
        microns_per_pixel: f64,
        mut color: impl FnMut(u32, u32) -> [u8; 3],
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(3 * width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                pixels.extend_from_slice(&color(x, y));
            }
        }
        Self::new(width, height, pixels, microns_per_pixel)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn microns_per_pixel(&self) -> f64 {
        self.microns_per_pixel
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = 3 * (y as usize * self.width as usize + x as usize);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }
}

/// Location of a square patch inside a named slide.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PatchRef {
    pub slide_id: String,
    pub x: u32,
    pub y: u32,
    pub size: u32,
}

/// A square RGB pixel block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatchPixels {
    size: u32,
    data: Vec<u8>,
}

impl PatchPixels {
    pub fn new(size: u32, data: Vec<u8>) -> Result<Self> {
        if size == 0 || data.len() != 3 * size as usize * size as usize {
            return Err(Error::InvalidImage(format!(
                "patch of size {size} needs {} bytes, got {}",
                3 * size as usize * size as usize,
                data.len()
            )));
        }
        Ok(Self { size, data })
    }

    pub fn filled(size: u32, rgb: [u8; 3]) -> Self {
        let n = size as usize * size as usize;
        let data = rgb.iter().copied().cycle().take(3 * n).collect();
        Self { size, data }
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = 3 * (y as usize * self.size as usize + x as usize);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn pixels(&self) -> impl Iterator<Item = [u8; 3]> + '_ {
        self.data.chunks_exact(3).map(|c| [c[0], c[1], c[2]])
    }
}

/// Copies the square region named by `patch` out of `slide`.
pub fn extract_patch(slide: &SlideImage, patch: &PatchRef) -> Result<PatchPixels> {
    let fits = patch.size > 0
        && u64::from(patch.x) + u64::from(patch.size) <= u64::from(slide.width)
        && u64::from(patch.y) + u64::from(patch.size) <= u64::from(slide.height);
    if !fits {
        return Err(Error::OutOfBounds {
            x: patch.x,
            y: patch.y,
            size: patch.size,
        });
    }
    let size = patch.size as usize;
    let mut data = Vec::with_capacity(3 * size * size);
    let stride = 3 * slide.width as usize;
    for row in 0..size {
        let start = (patch.y as usize + row) * stride + 3 * patch.x as usize;
        data.extend_from_slice(&slide.pixels[start..start + 3 * size]);
    }
    Ok(PatchPixels { size: patch.size, data })
}
