//! Synthetic four-class slides with known signature patches.
//!
//! Every slide is a square of tissue cells inside a one-cell white border.
//! Background cells mix a pink stroma color with purple nuclei; a fixed
//! fraction of cells carry the class's signature color. The colors fall in
//! disjoint toy-embedder histogram bins.

use std::path::{Path, PathBuf};

use milattn_core::numerics::{stream_id, RngStream};
use milattn_core::slidelab::SlideImage;
use milattn_core::trainer::TrainConfig;
use milattn_core::HER2_CLASSES;

use crate::error::{Error, Result};
use crate::imageio::{save_slide_png, write_file};
use crate::manifest::{Manifest, SlideRecord, Split};

pub const SIGNATURE_COLORS: [[u8; 3]; HER2_CLASSES] = [[32, 32, 224], [32, 160, 32], [224, 32, 32], [224, 224, 32]];
pub const STROMA: [u8; 3] = [224, 150, 190];
pub const NUCLEI: [u8; 3] = [150, 90, 170];
pub const BACKGROUND: [u8; 3] = [245, 245, 245];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub slides_per_class: usize,
    /// Slides per class placed in the test split.
    pub test_per_class: usize,
    /// Tissue cells per side.
    pub grid: u32,
    pub patch_size: u32,
    pub signature_fraction: f64,
    /// Fraction of signature-cell pixels drawn in the signature color.
    pub signature_density: f64,
    pub nuclei_fraction: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            slides_per_class: 10,
            test_per_class: 2,
            grid: 10,
            patch_size: 16,
            signature_fraction: 0.1,
            signature_density: 0.7,
            nuclei_fraction: 0.3,
            seed: 0,
        }
    }
}

/// Desk-scale training settings for the synthetic dataset. Test bags keep
/// the full-size count so fold metrics are not dominated by sampling noise.
pub fn synth_train_config() -> TrainConfig {
    TrainConfig {
        test_bags: 2500,
        ..TrainConfig::desk(100)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSlide {
    pub slide_id: String,
    pub label: usize,
    pub split: Split,
    pub image: SlideImage,
    /// Top-left pixel of every signature cell.
    pub signature: Vec<(u32, u32)>,
    /// Top-left pixel of every other tissue cell.
    pub background: Vec<(u32, u32)>,
}

fn jitter(rng: &mut RngStream, base: [u8; 3], amount: f64) -> [u8; 3] {
    base.map(|c| (f64::from(c) + rng.uniform(-amount, amount)).round().clamp(0.0, 255.0) as u8)
}

pub fn generate_slide(cfg: &SynthConfig, slide_id: &str, label: usize, split: Split) -> Result<SynthSlide> {
    if label >= HER2_CLASSES {
        return Err(milattn_core::Error::ClassOutOfRange {
            class: label,
            classes: HER2_CLASSES,
        }
        .into());
    }
    if cfg.grid == 0 || cfg.patch_size == 0 || !(0.0..=1.0).contains(&cfg.signature_fraction) {
        return Err(Error::Config(
            "synthetic grid, patch size and signature fraction must be valid".into(),
        ));
    }
    let mut rng = RngStream::new(cfg.seed, stream_id(slide_id.as_bytes(), 0));
    let cells = (cfg.grid * cfg.grid) as usize;
    let n_sig = (cells as f64 * cfg.signature_fraction).round() as usize;
    let mut order: Vec<usize> = (0..cells).collect();
    rng.shuffle(&mut order);
    let mut is_sig = vec![false; cells];
    for &c in &order[..n_sig] {
        is_sig[c] = true;
    }

    let p = cfg.patch_size;
    let side = (cfg.grid + 2) * p;
    let mut pixels = Vec::with_capacity((side * side * 3) as usize);
    let sig_color = SIGNATURE_COLORS[label];
    for y in 0..side {
        for x in 0..side {
            let (cx, cy) = (x / p, y / p);
            let px = if cx == 0 || cy == 0 || cx > cfg.grid || cy > cfg.grid {
                jitter(&mut rng, BACKGROUND, 6.0)
            } else {
                let cell = ((cy - 1) * cfg.grid + (cx - 1)) as usize;
                let u = rng.next_f64();
                if is_sig[cell] && u < cfg.signature_density {
                    jitter(&mut rng, sig_color, 20.0)
                } else if rng.next_f64() < cfg.nuclei_fraction {
                    jitter(&mut rng, NUCLEI, 16.0)
                } else {
                    jitter(&mut rng, STROMA, 16.0)
                }
            };
            pixels.extend_from_slice(&px);
        }
    }
    let image = SlideImage::new(side, side, pixels, 0.5)?;
    let mut signature = Vec::new();
    let mut background = Vec::new();
    for (cell, &sig) in is_sig.iter().enumerate() {
        let (cx, cy) = (cell as u32 % cfg.grid + 1, cell as u32 / cfg.grid + 1);
        let at = (cx * p, cy * p);
        if sig {
            signature.push(at);
        } else {
            background.push(at);
        }
    }
    Ok(SynthSlide {
        slide_id: slide_id.into(),
        label,
        split,
        image,
        signature,
        background,
    })
}

/// `slides_per_class` slides of every class, the last `test_per_class` of
/// each in the test split. Ids look like `c2_s07`.
pub fn generate(cfg: &SynthConfig) -> Result<Vec<SynthSlide>> {
    if cfg.test_per_class > cfg.slides_per_class {
        return Err(Error::Config("test_per_class exceeds slides_per_class".into()));
    }
    let mut out = Vec::with_capacity(cfg.slides_per_class * HER2_CLASSES);
    for label in 0..HER2_CLASSES {
        for i in 0..cfg.slides_per_class {
            let split = if i >= cfg.slides_per_class - cfg.test_per_class {
                Split::Test
            } else {
                Split::Train
            };
            out.push(generate_slide(cfg, &format!("c{label}_s{i:02}"), label, split)?);
        }
    }
    Ok(out)
}

/// Writes one PNG per slide under `dir/slides/` and `dir/manifest.json`;
/// returns the manifest path.
pub fn write_dataset(slides: &[SynthSlide], dir: &Path) -> Result<PathBuf> {
    let slide_dir = dir.join("slides");
    std::fs::create_dir_all(&slide_dir).map_err(|e| Error::io(&slide_dir, e))?;
    let mut records = Vec::with_capacity(slides.len());
    for s in slides {
        let rel = PathBuf::from("slides").join(format!("{}.png", s.slide_id));
        save_slide_png(&s.image, &dir.join(&rel))?;
        records.push(SlideRecord {
            slide_id: s.slide_id.clone(),
            image_path: Some(rel),
            store_path: None,
            her2_score: s.label,
            split: s.split,
        });
    }
    let manifest = dir.join("manifest.json");
    Manifest::save(&records, &manifest)?;
    let truth: Vec<serde_json::Value> = slides
        .iter()
        .map(|s| serde_json::json!({"slide_id": s.slide_id, "signature": s.signature}))
        .collect();
    write_file(
        &dir.join("signatures.json"),
        &serde_json::to_vec_pretty(&truth).expect("serializes"),
    )?;
    Ok(manifest)
}
