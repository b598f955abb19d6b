use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{stream_id, RngStream};

/// Assignment of training slides to `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    /// `assignment[i]` is the fold of training slide `i`.
    pub assignment: Vec<usize>,
}

impl FoldPlan {
    /// Slides held out as fold `fold`.
    pub fn held_out(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] == fold)
            .collect()
    }

    /// Slides of the remaining `k − 1` folds.
    pub fn training(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = alloc::vec![0; self.k];
        for &f in &self.assignment {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Splits slides (given by their labels) into `k` folds whose sizes differ by
/// at most one. With `stratify`, slides are dealt class by class so that each
/// class is spread as evenly as possible over the folds.
pub fn kfold_split(labels: &[usize], k: usize, seed: u64, stratify: bool) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!("k must be >= 2, got {k}")));
    }
    if k > labels.len() {
        return Err(Error::InvalidConfig(format!(
            "k = {k} exceeds the {} available slides",
            labels.len()
        )));
    }
    let mut rng = RngStream::new(seed, stream_id(b"kfold", k as u64));
    let order: Vec<usize> = if stratify {
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, &l) in labels.iter().enumerate() {
            groups.entry(l).or_default().push(i);
        }
        let mut order = Vec::with_capacity(labels.len());
        for group in groups.values_mut() {
            rng.shuffle(group);
            order.extend_from_slice(group);
        }
        order
    } else {
        let mut order: Vec<usize> = (0..labels.len()).collect();
        rng.shuffle(&mut order);
        order
    };
    let mut fold_ids: Vec<usize> = (0..k).collect();
    rng.shuffle(&mut fold_ids);
    let mut assignment = alloc::vec![0; labels.len()];
    for (pos, &slide) in order.iter().enumerate() {
        assignment[slide] = fold_ids[pos % k];
    }
    Ok(FoldPlan { k, assignment })
}
