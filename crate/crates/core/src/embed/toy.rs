use alloc::vec;

use super::Embedding;
use crate::slidelab::PatchPixels;

pub const TOY_BINS_PER_CHANNEL: usize = 4;
pub const TOY_DIM: usize = TOY_BINS_PER_CHANNEL * TOY_BINS_PER_CHANNEL * TOY_BINS_PER_CHANNEL;

/// Stand-in for a frozen convolutional embedder: the L1-normalized 4×4×4 RGB
/// histogram of the patch. Bin index is `16·(r/64) + 4·(g/64) + b/64`.
pub fn toy_embed(patch: &PatchPixels) -> Embedding {
    let mut counts = vec![0u32; TOY_DIM];
    for [r, g, b] in patch.pixels() {
        let bin = |c: u8| usize::from(c) / (256 / TOY_BINS_PER_CHANNEL);
        counts[bin(r) * 16 + bin(g) * 4 + bin(b)] += 1;
    }
    let total = f64::from(patch.size()) * f64::from(patch.size());
    let values = counts.iter().map(|&c| (f64::from(c) / total) as f32).collect();
    Embedding::new(values).expect("histogram is finite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slidelab::PatchPixels;
    use alloc::vec::Vec;

    #[test]
    fn pure_red_is_one_hot() {
        let e = toy_embed(&PatchPixels::filled(5, [255, 0, 0]));
        assert_eq!(e.dim(), 64);
        assert_eq!(e.values()[48], 1.0);
        assert_eq!(e.values().iter().filter(|&&v| v != 0.0).count(), 1);
    }

    #[test]
    fn half_red_half_blue() {
        let mut data = Vec::new();
        for _y in 0..4 {
            for x in 0..4 {
                data.extend_from_slice(if x < 2 { &[255, 0, 0] } else { &[0, 0, 255] });
            }
        }
        let e = toy_embed(&PatchPixels::new(4, data).unwrap());
        assert_eq!(e.values()[48], 0.5);
        assert_eq!(e.values()[3], 0.5);
        assert_eq!(e.values().iter().filter(|&&v| v != 0.0).count(), 2);
    }

    #[test]
    fn sums_to_one() {
        let mut data = Vec::new();
        for i in 0..(7 * 7 * 3) {
            data.push((i * 37 % 256) as u8);
        }
        let e = toy_embed(&PatchPixels::new(7, data).unwrap());
        let s: f32 = e.values().iter().sum();
        assert!((s - 1.0).abs() < 1e-6);
    }
}
