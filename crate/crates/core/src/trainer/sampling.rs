use alloc::vec::Vec;
use core::borrow::Borrow;

use crate::embed::EmbeddingStore;
use crate::error::{Error, Result};
use crate::milhead::Bag;
use crate::numerics::{stream_id, RngStream};

/// A slide's embeddings together with its HER2 score.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledStore {
    pub store: EmbeddingStore,
    pub label: usize,
}

impl LabeledStore {
    pub fn new(store: EmbeddingStore, label: usize) -> Self {
        Self { store, label }
    }

    pub fn slide_id(&self) -> &str {
        self.store.slide_id()
    }
}

/// Draws `bag_size` instances from `store`.
///
/// Without replacement when the store is large enough. Smaller stores
/// contribute every entry once and the remainder is drawn with replacement.
pub fn sample_bag(store: &EmbeddingStore, label: Option<usize>, bag_size: usize, rng: &mut RngStream) -> Result<Bag> {
    let len = store.len();
    if len == 0 {
        return Err(Error::EmptyStore(store.slide_id().into()));
    }
    if bag_size == 0 {
        return Err(Error::EmptyInput("bag size"));
    }
    let mut indices: Vec<usize> = (0..len).collect();
    if len >= bag_size {
        for i in 0..bag_size {
            let j = i + rng.below(len - i);
            indices.swap(i, j);
        }
        indices.truncate(bag_size);
    } else {
        rng.shuffle(&mut indices);
        while indices.len() < bag_size {
            indices.push(rng.below(len));
        }
    }
    Bag::from_store(store, label, &indices)
}

/// `count` bags spread round-robin over `stores`. Bag `i` comes from slide
/// `i mod stores.len()` and uses stream `stream_id(slide_id, i)` under
/// `base_seed`, so the list depends only on the slides and the seed.
pub fn fixed_bags<S: Borrow<LabeledStore>>(
    stores: &[S],
    count: usize,
    bag_size: usize,
    base_seed: u64,
) -> Result<Vec<Bag>> {
    if stores.is_empty() {
        return Err(Error::EmptyInput("slides for fixed bags"));
    }
    (0..count)
        .map(|i| {
            let slide = stores[i % stores.len()].borrow();
            let mut rng = RngStream::new(base_seed, stream_id(slide.slide_id().as_bytes(), i as u64));
            sample_bag(&slide.store, Some(slide.label), bag_size, &mut rng)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::Embedding;
    use alloc::collections::BTreeMap;
    use alloc::format;
    use alloc::string::ToString;
    use alloc::vec;

    fn store(id: &str, n: u32) -> EmbeddingStore {
        let mut s = EmbeddingStore::new(id, 2);
        for i in 0..n {
            s.push(i, 0, Embedding::new(vec![i as f32, 1.0]).unwrap()).unwrap();
        }
        s
    }

    #[test]
    fn exhausts_store_without_replacement() {
        let s = store("a", 100);
        let bag = sample_bag(&s, Some(1), 100, &mut RngStream::new(1, 1)).unwrap();
        let mut xs: Vec<u32> = bag.locations().iter().map(|l| l.0).collect();
        assert_ne!(xs, (0..100).collect::<Vec<_>>(), "should be shuffled");
        xs.sort_unstable();
        assert_eq!(xs, (0..100).collect::<Vec<_>>());
        assert_eq!(bag.label(), Some(1));
    }

    #[test]
    fn no_repeats_when_store_is_large() {
        let s = store("a", 50);
        let bag = sample_bag(&s, None, 20, &mut RngStream::new(4, 0)).unwrap();
        let mut xs: Vec<u32> = bag.locations().iter().map(|l| l.0).collect();
        xs.sort_unstable();
        xs.dedup();
        assert_eq!(xs.len(), 20);
    }

    #[test]
    fn small_store_fills_with_replacement() {
        let s = store("a", 10);
        for seed in 0..20 {
            let bag = sample_bag(&s, None, 100, &mut RngStream::new(seed, 0)).unwrap();
            assert_eq!(bag.len(), 100);
            let mut counts = BTreeMap::new();
            for l in bag.locations() {
                *counts.entry(l.0).or_insert(0) += 1;
            }
            assert_eq!(counts.len(), 10);
        }
    }

    #[test]
    fn same_stream_same_bag() {
        let s = store("a", 30);
        let a = sample_bag(&s, None, 7, &mut RngStream::new(2, 3)).unwrap();
        let b = sample_bag(&s, None, 7, &mut RngStream::new(2, 3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_store_is_an_error() {
        let s = store("e", 0);
        assert_eq!(
            sample_bag(&s, None, 5, &mut RngStream::new(0, 0)),
            Err(Error::EmptyStore("e".into()))
        );
    }

    #[test]
    fn fixed_bags_round_robin_and_reproducible() {
        let slides: Vec<LabeledStore> = (0..3)
            .map(|i| LabeledStore::new(store(&format!("s{i}"), 15), i))
            .collect();
        let a = fixed_bags(&slides, 10, 5, 77).unwrap();
        let b = fixed_bags(&slides, 10, 5, 77).unwrap();
        let c = fixed_bags(&slides, 10, 5, 78).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let mut per_slide = BTreeMap::new();
        for bag in &a {
            *per_slide.entry(bag.slide_id().to_string()).or_insert(0usize) += 1;
        }
        let counts: Vec<usize> = per_slide.values().copied().collect();
        assert_eq!(counts, vec![4, 3, 3]);
        // a prefix does not depend on how many bags are requested
        let shorter = fixed_bags(&slides, 4, 5, 77).unwrap();
        assert_eq!(&a[..4], &shorter[..]);
    }
}
