//! PNG slides, mask exports and heatmap overlays.

use std::fs;
use std::io::Write;
use std::path::Path;

use image::{ImageBuffer, Luma, Rgb, RgbImage};
use milattn_core::slidelab::{SlideImage, TissueMask};
use milattn_core::slidescore::HeatCell;

use crate::error::{Error, Result};

/// Loads an 8-bit RGB (or RGBA/gray, converted) PNG as a slide.
pub fn load_slide_png(path: &Path, microns_per_pixel: f64) -> Result<SlideImage> {
    let img = image::open(path).map_err(|e| Error::Image {
        path: path.into(),
        message: e.to_string(),
    })?;
    let rgb = img.into_rgb8();
    let (w, h) = rgb.dimensions();
    SlideImage::new(w, h, rgb.into_raw(), microns_per_pixel).map_err(|e| Error::at(path, e))
}

pub fn save_slide_png(slide: &SlideImage, path: &Path) -> Result<()> {
    save_rgb(path, slide.width(), slide.height(), slide.pixels().to_vec())
}

pub fn save_rgb(path: &Path, width: u32, height: u32, data: Vec<u8>) -> Result<()> {
    let img: RgbImage = ImageBuffer::from_raw(width, height, data).ok_or_else(|| Error::Image {
        path: path.into(),
        message: "pixel buffer does not match dimensions".into(),
    })?;
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| image_error(path, e))
}

fn image_error(path: &Path, e: image::ImageError) -> Error {
    match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Image {
            path: path.into(),
            message: other.to_string(),
        },
    }
}

/// One pixel per grid cell: 255 for eligible cells, 0 otherwise.
pub fn save_mask_png(mask: &TissueMask, path: &Path) -> Result<()> {
    let img = ImageBuffer::from_fn(mask.cols().max(1), mask.rows().max(1), |c, r| {
        Luma([if mask.is_eligible(c, r) { 255u8 } else { 0 }])
    });
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| image_error(path, e))
}

/// Top-left pixel coordinates of the eligible cells, one `x,y` row each.
pub fn write_mask_csv(mask: &TissueMask, path: &Path) -> Result<()> {
    let mut out = String::from("x,y\n");
    for (x, y) in mask.eligible_coords() {
        out.push_str(&format!("{x},{y}\n"));
    }
    write_file(path, out.as_bytes())
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Blue-to-red ramp for `t` in `[0, 1]`.
pub fn ramp(t: f64) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0);
    let (r, g, b) = if t < 0.5 {
        let u = t * 2.0;
        (0.0, u, 1.0 - u)
    } else {
        let u = (t - 0.5) * 2.0;
        (u, 1.0 - u, 0.0)
    };
    [
        (r * 255.0).round() as u8,
        (g * 255.0).round() as u8,
        (b * 255.0).round() as u8,
    ]
}

/// Blends the ramp color of each cell's displayed value over its patch
/// square. `scale` multiplies the raw means before clamping to `[0, 1]`.
pub fn render_overlay(slide: &SlideImage, cells: &[HeatCell], patch_size: u32, scale: f64, alpha: f64) -> RgbImage {
    let mut img: RgbImage =
        ImageBuffer::from_raw(slide.width(), slide.height(), slide.pixels().to_vec()).expect("slide buffer is valid");
    for cell in cells {
        let color = ramp(cell.mean * scale);
        let x_end = (cell.x + patch_size).min(slide.width());
        let y_end = (cell.y + patch_size).min(slide.height());
        for y in cell.y..y_end {
            for x in cell.x..x_end {
                let Rgb(base) = *img.get_pixel(x, y);
                let mut px = [0u8; 3];
                for c in 0..3 {
                    let v = (1.0 - alpha) * f64::from(base[c]) + alpha * f64::from(color[c]);
                    px[c] = v.round().clamp(0.0, 255.0) as u8;
                }
                img.put_pixel(x, y, Rgb(px));
            }
        }
    }
    img
}

pub fn save_overlay(slide: &SlideImage, cells: &[HeatCell], patch_size: u32, scale: f64, path: &Path) -> Result<()> {
    let img = render_overlay(slide, cells, patch_size, scale, 0.5);
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| image_error(path, e))
}
