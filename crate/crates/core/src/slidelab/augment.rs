use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::hsv::{hsv_to_rgb, rgb_unit_to_hsv};
use super::image::PatchPixels;
use crate::error::{Error, Result};
use crate::numerics::RngStream;

/// Closed sampling interval `[lo, hi]`; `lo == hi` pins the value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub const fn fixed(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    fn sample(&self, rng: &mut RngStream) -> f64 {
        rng.uniform(self.lo, self.hi)
    }

    fn is_ordered(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi
    }
}

/// Random photometric and geometric perturbations applied to one patch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    pub brightness: Interval,
    pub contrast: Interval,
    pub saturation: Interval,
    /// Hue shift in degrees.
    pub hue_shift: Interval,
    /// Rotation in degrees, counter-clockwise in image coordinates.
    pub rotation: Interval,
    /// Horizontal shear angle in degrees.
    pub shear: Interval,
    /// Translation as a fraction of the patch size, per axis.
    pub translate: Interval,
    pub scale: Interval,
    /// Standard deviation of additive noise, in 8-bit units.
    pub noise_sigma: f64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            brightness: Interval::new(0.8, 1.2),
            contrast: Interval::new(0.8, 1.2),
            saturation: Interval::new(0.8, 1.2),
            hue_shift: Interval::new(-18.0, 18.0),
            rotation: Interval::new(-180.0, 180.0),
            shear: Interval::new(-5.0, 5.0),
            translate: Interval::new(-0.1, 0.1),
            scale: Interval::new(0.9, 1.1),
            noise_sigma: 2.5,
        }
    }
}

impl AugmentConfig {
    /// A configuration that leaves every patch untouched.
    pub fn identity() -> Self {
        Self {
            brightness: Interval::fixed(1.0),
            contrast: Interval::fixed(1.0),
            saturation: Interval::fixed(1.0),
            hue_shift: Interval::fixed(0.0),
            rotation: Interval::fixed(0.0),
            shear: Interval::fixed(0.0),
            translate: Interval::fixed(0.0),
            scale: Interval::fixed(1.0),
            noise_sigma: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("brightness", self.brightness),
            ("contrast", self.contrast),
            ("saturation", self.saturation),
            ("hue_shift", self.hue_shift),
            ("rotation", self.rotation),
            ("shear", self.shear),
            ("translate", self.translate),
            ("scale", self.scale),
        ];
        for (name, iv) in named {
            if !iv.is_ordered() {
                return Err(Error::InvalidConfig(format!(
                    "augment.{name}: [{}, {}] is not an ordered interval",
                    iv.lo, iv.hi
                )));
            }
        }
        if self.brightness.lo < 0.0 || self.contrast.lo < 0.0 || self.saturation.lo < 0.0 {
            return Err(Error::InvalidConfig("augment color factors must be >= 0".into()));
        }
        if self.scale.lo <= 0.0 {
            return Err(Error::InvalidConfig("augment.scale must be > 0".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidConfig("augment.noise_sigma must be >= 0".into()));
        }
        Ok(())
    }
}

struct Draw {
    brightness: f64,
    contrast: f64,
    saturation: f64,
    hue_shift: f64,
    rotation: f64,
    shear: f64,
    tx: f64,
    ty: f64,
    scale: f64,
}

impl Draw {
    // Every parameter is drawn even when its interval is degenerate, so the
    // stream position after this call does not depend on the configuration.
    fn sample(cfg: &AugmentConfig, rng: &mut RngStream) -> Self {
        Self {
            brightness: cfg.brightness.sample(rng),
            contrast: cfg.contrast.sample(rng),
            saturation: cfg.saturation.sample(rng),
            hue_shift: cfg.hue_shift.sample(rng),
            rotation: cfg.rotation.sample(rng),
            shear: cfg.shear.sample(rng),
            tx: cfg.translate.sample(rng),
            ty: cfg.translate.sample(rng),
            scale: cfg.scale.sample(rng),
        }
    }
}

/// Color jitter, then an affine warp with reflect padding and bilinear
/// resampling, then additive Gaussian noise. Output keeps the input size.
pub fn augment_patch(patch: &PatchPixels, cfg: &AugmentConfig, rng: &mut RngStream) -> Result<PatchPixels> {
    cfg.validate()?;
    let d = Draw::sample(cfg, rng);
    let n = patch.size() as usize;
    let mut buf: Vec<f64> = patch.data().iter().map(|&b| f64::from(b)).collect();

    if d.brightness != 1.0 {
        buf.iter_mut().for_each(|v| *v = (*v * d.brightness).clamp(0.0, 255.0));
    }
    if d.contrast != 1.0 {
        let mean = buf.chunks_exact(3).map(luma).sum::<f64>() / (n * n) as f64;
        buf.iter_mut()
            .for_each(|v| *v = ((*v - mean) * d.contrast + mean).clamp(0.0, 255.0));
    }
    if d.saturation != 1.0 {
        for px in buf.chunks_exact_mut(3) {
            let gray = luma(px);
            px.iter_mut()
                .for_each(|v| *v = ((*v - gray) * d.saturation + gray).clamp(0.0, 255.0));
        }
    }
    if d.hue_shift != 0.0 {
        for px in buf.chunks_exact_mut(3) {
            let (h, s, v) = rgb_unit_to_hsv(px[0] / 255.0, px[1] / 255.0, px[2] / 255.0);
            let (r, g, b) = hsv_to_rgb(h + d.hue_shift, s, v);
            px[0] = (r * 255.0).clamp(0.0, 255.0);
            px[1] = (g * 255.0).clamp(0.0, 255.0);
            px[2] = (b * 255.0).clamp(0.0, 255.0);
        }
    }

    let warped = d.rotation != 0.0 || d.shear != 0.0 || d.scale != 1.0 || d.tx != 0.0 || d.ty != 0.0;
    if warped {
        buf = affine_warp(&buf, n, &d);
    }

    if cfg.noise_sigma > 0.0 {
        for v in buf.iter_mut() {
            *v += cfg.noise_sigma * rng.normal();
        }
    }

    let data = buf.iter().map(|v| libm::round(v.clamp(0.0, 255.0)) as u8).collect();
    PatchPixels::new(patch.size(), data)
}

fn luma(px: &[f64]) -> f64 {
    0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2]
}

fn affine_warp(src: &[f64], n: usize, d: &Draw) -> Vec<f64> {
    let (sin, cos) = libm::sincos(d.rotation.to_radians());
    let shear = libm::tan(d.shear.to_radians());
    // forward = scale · R · [[1, shear], [0, 1]]
    let a = d.scale * cos;
    let b = d.scale * (cos * shear - sin);
    let c = d.scale * sin;
    let e = d.scale * (sin * shear + cos);
    let det = a * e - b * c;
    let (ia, ib, ic, ie) = (e / det, -b / det, -c / det, a / det);

    let center = (n as f64 - 1.0) / 2.0;
    let (tx, ty) = (d.tx * n as f64, d.ty * n as f64);
    let mut out = alloc::vec![0.0; src.len()];
    for y in 0..n {
        for x in 0..n {
            let dx = x as f64 - center - tx;
            let dy = y as f64 - center - ty;
            let sx = center + ia * dx + ib * dy;
            let sy = center + ic * dx + ie * dy;
            let px = bilinear(src, n, sx, sy);
            out[3 * (y * n + x)..3 * (y * n + x) + 3].copy_from_slice(&px);
        }
    }
    out
}

/// Mirrors `u` into `[0, n − 1]` without repeating the edge sample.
fn reflect(u: f64, n: usize) -> f64 {
    if n == 1 {
        return 0.0;
    }
    let last = (n - 1) as f64;
    let period = 2.0 * last;
    let mut r = libm::fmod(libm::fabs(u), period);
    if r > last {
        r = period - r;
    }
    r
}

fn bilinear(src: &[f64], n: usize, x: f64, y: f64) -> [f64; 3] {
    let x = reflect(x, n);
    let y = reflect(y, n);
    let x0 = libm::floor(x) as usize;
    let y0 = libm::floor(y) as usize;
    let x1 = (x0 + 1).min(n - 1);
    let y1 = (y0 + 1).min(n - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let at = |xx: usize, yy: usize, ch: usize| src[3 * (yy * n + xx) + ch];
    let mut out = [0.0; 3];
    for (ch, o) in out.iter_mut().enumerate() {
        let top = at(x0, y0, ch) * (1.0 - fx) + at(x1, y0, ch) * fx;
        let bottom = at(x0, y1, ch) * (1.0 - fx) + at(x1, y1, ch) * fx;
        *o = top * (1.0 - fy) + bottom * fy;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textured(n: u32) -> PatchPixels {
        let mut data = Vec::new();
        for y in 0..n {
            for x in 0..n {
                data.extend_from_slice(&[(x * 13 + y * 7) as u8, (x * y) as u8, (200 - x - y) as u8]);
            }
        }
        PatchPixels::new(n, data).unwrap()
    }

    #[test]
    fn identity_config_is_a_no_op() {
        let p = textured(9);
        let out = augment_patch(&p, &AugmentConfig::identity(), &mut RngStream::new(1, 2)).unwrap();
        assert_eq!(out, p);
    }

    #[test]
    fn deterministic_per_stream() {
        let p = textured(12);
        let cfg = AugmentConfig::default();
        let a = augment_patch(&p, &cfg, &mut RngStream::new(9, 4)).unwrap();
        let b = augment_patch(&p, &cfg, &mut RngStream::new(9, 4)).unwrap();
        let c = augment_patch(&p, &cfg, &mut RngStream::new(9, 5)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.size(), p.size());
        assert_eq!(a.data().len(), p.data().len());
    }

    #[test]
    fn half_turn_reverses_indices() {
        let n = 10;
        let p = textured(n);
        let cfg = AugmentConfig {
            rotation: Interval::fixed(180.0),
            ..AugmentConfig::identity()
        };
        let out = augment_patch(&p, &cfg, &mut RngStream::new(0, 0)).unwrap();
        for y in 0..n {
            for x in 0..n {
                assert_eq!(out.pixel(x, y), p.pixel(n - 1 - x, n - 1 - y));
            }
        }
    }

    #[test]
    fn quarter_turn_on_odd_patch() {
        let n = 7;
        let p = textured(n);
        let cfg = AugmentConfig {
            rotation: Interval::fixed(90.0),
            ..AugmentConfig::identity()
        };
        let out = augment_patch(&p, &cfg, &mut RngStream::new(0, 0)).unwrap();
        // inverse map of a +90° rotation: src = (y, n-1-x)
        for y in 0..n {
            for x in 0..n {
                assert_eq!(out.pixel(x, y), p.pixel(y, n - 1 - x));
            }
        }
    }

    #[test]
    fn translation_reflects_at_border() {
        let n = 8;
        let p = textured(n);
        let cfg = AugmentConfig {
            translate: Interval::fixed(0.25),
            ..AugmentConfig::identity()
        };
        let out = augment_patch(&p, &cfg, &mut RngStream::new(0, 0)).unwrap();
        // shifted by 2 px on both axes; x = 0 samples src x = -2 -> 2
        assert_eq!(out.pixel(5, 5), p.pixel(3, 3));
        assert_eq!(out.pixel(0, 0), p.pixel(2, 2));
        assert_eq!(out.pixel(1, 4), p.pixel(1, 2));
    }

    #[test]
    fn brightness_saturates() {
        let p = PatchPixels::filled(4, [100, 200, 50]);
        let cfg = AugmentConfig {
            brightness: Interval::fixed(2.0),
            ..AugmentConfig::identity()
        };
        let out = augment_patch(&p, &cfg, &mut RngStream::new(0, 0)).unwrap();
        assert!(out.pixels().all(|px| px == [200, 255, 100]));
    }

    #[test]
    fn zero_saturation_gives_gray() {
        let p = PatchPixels::filled(3, [200, 40, 120]);
        let cfg = AugmentConfig {
            saturation: Interval::fixed(0.0),
            ..AugmentConfig::identity()
        };
        let out = augment_patch(&p, &cfg, &mut RngStream::new(0, 0)).unwrap();
        let px = out.pixel(1, 1);
        assert!(px[0] == px[1] && px[1] == px[2]);
    }

    #[test]
    fn rejects_misordered_interval() {
        let cfg = AugmentConfig {
            scale: Interval::new(1.2, 0.9),
            ..AugmentConfig::default()
        };
        assert!(augment_patch(&textured(4), &cfg, &mut RngStream::new(0, 0)).is_err());
        let cfg = AugmentConfig {
            noise_sigma: -1.0,
            ..AugmentConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
