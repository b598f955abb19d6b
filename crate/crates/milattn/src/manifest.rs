//! Dataset manifests: which slides exist, where their pixels or embeddings
//! live, and their HER2 score.

use std::path::{Path, PathBuf};

use milattn_core::embed::{toy_embed, EmbeddingStore, TOY_DIM};
use milattn_core::slidelab::{extract_patch, tissue_mask, MaskConfig, SlideImage};
use milattn_core::trainer::LabeledStore;
use milattn_core::HER2_CLASSES;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imageio::{load_slide_png, read_file, write_file};
use crate::store_io::read_store;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    #[default]
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlideRecord {
    pub slide_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub store_path: Option<PathBuf>,
    pub her2_score: usize,
    #[serde(default)]
    pub split: Split,
}

/// Manifest records with paths resolved against the manifest's directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub path: PathBuf,
    pub slides: Vec<SlideRecord>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = read_file(path)?;
        let mut slides: Vec<SlideRecord> = serde_json::from_slice(&bytes).map_err(|source| Error::Json {
            path: path.into(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        let mut seen = std::collections::BTreeSet::new();
        for s in &mut slides {
            if s.her2_score >= HER2_CLASSES {
                return Err(Error::Config(format!(
                    "{}: slide {}: her2_score {} is outside 0..{}",
                    path.display(),
                    s.slide_id,
                    s.her2_score,
                    HER2_CLASSES - 1
                )));
            }
            if s.image_path.is_none() && s.store_path.is_none() {
                return Err(Error::Config(format!(
                    "{}: slide {}: needs image_path or store_path",
                    path.display(),
                    s.slide_id
                )));
            }
            if !seen.insert(s.slide_id.clone()) {
                return Err(Error::Config(format!(
                    "{}: duplicate slide_id {}",
                    path.display(),
                    s.slide_id
                )));
            }
            s.image_path = s.image_path.take().map(|p| base.join(p));
            s.store_path = s.store_path.take().map(|p| base.join(p));
        }
        Ok(Manifest {
            path: path.into(),
            slides,
        })
    }

    pub fn save(slides: &[SlideRecord], path: &Path) -> Result<()> {
        let json = serde_json::to_vec_pretty(slides).expect("manifest serializes");
        write_file(path, &json)
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &SlideRecord> {
        self.slides.iter().filter(move |s| s.split == split)
    }
}

/// Embeds every eligible patch of a slide with the toy embedder.
pub fn embed_slide(slide: &SlideImage, slide_id: &str, mask: &MaskConfig) -> Result<EmbeddingStore> {
    let tissue = tissue_mask(slide, mask)?;
    let mut store = EmbeddingStore::new(slide_id, TOY_DIM);
    for r in tissue.eligible_refs(slide_id) {
        let patch = extract_patch(slide, &r)?;
        store.push(r.x, r.y, toy_embed(&patch))?;
    }
    Ok(store)
}

/// The slide's embeddings: read from `store_path` when given, otherwise
/// computed from `image_path`.
pub fn load_record(record: &SlideRecord, mask: &MaskConfig, microns_per_pixel: f64) -> Result<LabeledStore> {
    let store = match (&record.store_path, &record.image_path) {
        (Some(p), _) => read_store(p, &record.slide_id)?,
        (None, Some(p)) => {
            let slide = load_slide_png(p, microns_per_pixel)?;
            embed_slide(&slide, &record.slide_id, mask).map_err(|e| e.core().cloned().map_or(e, |c| Error::at(p, c)))?
        }
        (None, None) => unreachable!("validated on load"),
    };
    if store.is_empty() {
        return Err(Error::Core(milattn_core::Error::EmptyStore(record.slide_id.clone())));
    }
    Ok(LabeledStore::new(store, record.her2_score))
}

pub fn load_split(
    manifest: &Manifest,
    split: Split,
    mask: &MaskConfig,
    microns_per_pixel: f64,
) -> Result<Vec<LabeledStore>> {
    manifest
        .split(split)
        .map(|r| load_record(r, mask, microns_per_pixel))
        .collect()
}
