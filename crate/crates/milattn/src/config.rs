//! Run configuration: a JSON file layered over a profile, then `key=value`
//! overrides.

use std::path::{Path, PathBuf};

use milattn_core::slidelab::{AugmentConfig, MaskConfig};
use milattn_core::trainer::{TrainConfig, DEFAULT_LR_GRID, DEFAULT_WD_GRID};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::imageio::read_file;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    #[default]
    Paper,
    Desk,
}

impl Profile {
    /// Training defaults for the profile, without `epochs`.
    fn train_defaults(self) -> Value {
        let cfg = match self {
            Profile::Paper => TrainConfig::paper(0),
            Profile::Desk => TrainConfig::desk(0),
        };
        let mut v = serde_json::to_value(cfg).expect("config serializes");
        v.as_object_mut().expect("object").remove("epochs");
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Dataset manifest, relative to the config file.
    #[serde(default)]
    pub manifest: Option<PathBuf>,
    pub train: TrainConfig,
    #[serde(default = "d_folds")]
    pub folds: usize,
    #[serde(default = "d_true")]
    pub stratify: bool,
    #[serde(default)]
    pub mask: MaskConfig,
    #[serde(default = "d_mpp")]
    pub microns_per_pixel: f64,
    #[serde(default)]
    pub augment: AugmentConfig,
    /// Bags drawn per slide by `score` and `heatmap`.
    #[serde(default = "d_samples")]
    pub n_samples: usize,
    #[serde(default = "d_lr_grid")]
    pub lr_grid: Vec<f64>,
    #[serde(default = "d_wd_grid")]
    pub wd_grid: Vec<f64>,
    /// Seed for the shared test bags; defaults to `train.seed`.
    #[serde(default)]
    pub test_seed: Option<u64>,
}

fn d_folds() -> usize {
    5
}
fn d_true() -> bool {
    true
}
fn d_mpp() -> f64 {
    0.5
}
fn d_samples() -> usize {
    milattn_core::slidescore::DEFAULT_SAMPLES
}
fn d_lr_grid() -> Vec<f64> {
    DEFAULT_LR_GRID.to_vec()
}
fn d_wd_grid() -> Vec<f64> {
    DEFAULT_WD_GRID.to_vec()
}

impl RunConfig {
    pub fn test_seed(&self) -> u64 {
        self.test_seed.unwrap_or(self.train.seed)
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        self.augment.validate()?;
        if self.folds < 2 {
            return Err(Error::Config(format!("folds must be >= 2, got {}", self.folds)));
        }
        if self.n_samples == 0 {
            return Err(Error::Config("n_samples must be >= 1".into()));
        }
        if self.mask.patch_size == 0 || self.mask.stride() == 0 {
            return Err(Error::Config("mask.patch_size and mask.stride must be >= 1".into()));
        }
        if !(self.microns_per_pixel > 0.0 && self.microns_per_pixel.is_finite()) {
            return Err(Error::Config("microns_per_pixel must be > 0".into()));
        }
        if self.lr_grid.is_empty() || self.wd_grid.is_empty() {
            return Err(Error::Config("lr_grid and wd_grid must be non-empty".into()));
        }
        Ok(())
    }
}

/// A parsed `key=value` override. The value is read as JSON when it parses,
/// otherwise as a string.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Override {
    pub key: String,
    pub value: Value,
}

impl std::str::FromStr for Override {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (key, raw) = s
            .split_once('=')
            .ok_or_else(|| format!("override {s:?} is not key=value"))?;
        let key = key.trim();
        if key.is_empty() || key.split('.').any(str::is_empty) {
            return Err(format!("override {s:?} has an empty key"));
        }
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.into()));
        Ok(Override { key: key.into(), value })
    }
}

/// Config after layering, with the provenance needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub config: RunConfig,
    pub profile: Profile,
    pub source: Option<PathBuf>,
    pub overrides: Vec<Override>,
    /// Directory relative paths in the config resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ResolvedConfig {
    pub fn manifest_path(&self) -> Option<PathBuf> {
        self.config.manifest.as_ref().map(|m| self.base_dir.join(m))
    }
}

/// Layers profile defaults, the config file (if any), the overrides and an
/// explicit seed, in that order.
pub fn resolve_config(
    path: Option<&Path>,
    profile: Profile,
    overrides: &[Override],
    seed: Option<u64>,
) -> Result<ResolvedConfig> {
    let mut root = Value::Object(Map::new());
    set_path(&mut root, "train", profile.train_defaults())?;
    if let Some(path) = path {
        let bytes = read_file(path)?;
        let file: Value = serde_json::from_slice(&bytes).map_err(|source| Error::Json {
            path: path.into(),
            source,
        })?;
        if !file.is_object() {
            return Err(Error::Config(format!(
                "{}: top level must be an object",
                path.display()
            )));
        }
        merge(&mut root, file);
    }
    let mut applied = overrides.to_vec();
    if let Some(seed) = seed {
        applied.push(Override {
            key: "train.seed".into(),
            value: Value::from(seed),
        });
    }
    for o in &applied {
        set_path(&mut root, &o.key, o.value.clone())?;
    }
    let config: RunConfig = serde_json::from_value(root).map_err(|e| {
        let origin = path.map_or_else(|| "defaults".to_string(), |p| p.display().to_string());
        Error::Config(format!("{origin}: {e}"))
    })?;
    config.validate()?;
    Ok(ResolvedConfig {
        config,
        profile,
        source: path.map(Path::to_path_buf),
        overrides: applied,
        base_dir: path.and_then(Path::parent).map(Path::to_path_buf).unwrap_or_default(),
    })
}

fn merge(dst: &mut Value, src: Value) {
    match (dst, src) {
        (Value::Object(d), Value::Object(s)) => {
            for (k, v) in s {
                match d.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        d.insert(k, v);
                    }
                }
            }
        }
        (d, s) => *d = s,
    }
}

fn set_path(root: &mut Value, key: &str, value: Value) -> Result<()> {
    let mut cur = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("{key}: {} is not an object", parts[..i].join("."))))?;
        if i + 1 == parts.len() {
            obj.insert((*part).into(), value);
            return Ok(());
        }
        cur = obj.entry(*part).or_insert_with(|| Value::Object(Map::new()));
    }
    unreachable!("override keys are non-empty")
}
