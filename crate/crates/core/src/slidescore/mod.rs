//! Slide-level scoring by repeated bag sampling, and patch-level positivity
//! heatmaps from the attention weights of the same bags.
//!
//! Bag `i` of a run is drawn from stream `(seed, i)`, so a run with more
//! samples extends, rather than reshuffles, a run with fewer.

mod heatmap;

pub use heatmap::{HeatCell, Heatmap};

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::embed::EmbeddingStore;
use crate::error::{Error, Result};
use crate::evalkit::argmax;
use crate::milhead::{Bag, BagModel, BagOutput};
use crate::numerics::RngStream;
use crate::trainer::sample_bag;

/// Number of sampled bags used when none is configured.
pub const DEFAULT_SAMPLES: usize = 1000;

/// HER2 grades counted as positive.
pub const POSITIVE_CLASSES: [usize; 2] = [2, 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlideScore {
    pub slide_id: String,
    /// Mean class-probability vector over the sampled bags.
    pub probs: Vec<f64>,
    /// Argmax of `probs`, ties toward the lower grade.
    pub predicted: usize,
    pub n_samples: usize,
    pub seed: u64,
}

/// Probability mass on the positive grades.
pub fn positive_probability(probs: &[f64]) -> f64 {
    POSITIVE_CLASSES.iter().filter_map(|&c| probs.get(c)).sum()
}

fn sample_runs<M, F>(
    model: &M,
    store: &EmbeddingStore,
    n_samples: usize,
    bag_size: usize,
    seed: u64,
    mut visit: F,
) -> Result<()>
where
    M: BagModel + ?Sized,
    F: FnMut(&Bag, &BagOutput),
{
    if n_samples == 0 {
        return Err(Error::EmptyInput("n_samples"));
    }
    for i in 0..n_samples {
        let mut rng = RngStream::new(seed, i as u64);
        let bag = sample_bag(store, None, bag_size, &mut rng)?;
        let out = model.predict(&bag)?;
        visit(&bag, &out);
    }
    Ok(())
}

pub fn score_slide<M: BagModel + ?Sized>(
    model: &M,
    store: &EmbeddingStore,
    n_samples: usize,
    bag_size: usize,
    seed: u64,
) -> Result<SlideScore> {
    score_and_heatmap(model, store, n_samples, bag_size, seed).map(|(s, _)| s)
}

pub fn heatmap<M: BagModel + ?Sized>(
    model: &M,
    store: &EmbeddingStore,
    n_samples: usize,
    bag_size: usize,
    seed: u64,
) -> Result<Heatmap> {
    score_and_heatmap(model, store, n_samples, bag_size, seed).map(|(_, h)| h)
}

/// Scores the slide and builds its heatmap from one set of sampled bags.
///
/// Each instance of every bag contributes `P(positive) · a_k` to its
/// location; the heatmap keeps the per-location mean of those contributions.
pub fn score_and_heatmap<M: BagModel + ?Sized>(
    model: &M,
    store: &EmbeddingStore,
    n_samples: usize,
    bag_size: usize,
    seed: u64,
) -> Result<(SlideScore, Heatmap)> {
    let mut sum: Vec<f64> = Vec::new();
    let mut map = Heatmap::new();
    sample_runs(model, store, n_samples, bag_size, seed, |bag, out| {
        if sum.is_empty() {
            sum = vec![0.0; out.probs.len()];
        }
        for (s, p) in sum.iter_mut().zip(out.probs.as_slice()) {
            *s += p;
        }
        let p_pos = positive_probability(out.probs.as_slice());
        for (&(x, y), &a) in bag.locations().iter().zip(out.attention.as_slice()) {
            map.add(x, y, p_pos * a);
        }
    })?;
    let probs: Vec<f64> = sum.iter().map(|s| s / n_samples as f64).collect();
    let score = SlideScore {
        slide_id: store.slide_id().into(),
        predicted: argmax(&probs),
        probs,
        n_samples,
        seed,
    };
    Ok((score, map))
}
