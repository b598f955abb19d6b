use alloc::vec::Vec;
use core::borrow::Borrow;

use super::adam::{adam_step, AdamState};
use super::config::TrainConfig;
use super::sampling::{fixed_bags, sample_bag, LabeledStore};
use crate::error::{Error, Result};
use crate::milhead::{backward, bag_loss, forward, init_params, Bag, BagModel, BagOutput, MilParams};
use crate::numerics::{stream_id, RngStream};
use crate::HER2_CLASSES;

/// Stream id of epoch `epoch`'s training bags under `TrainConfig::seed`.
fn epoch_stream(epoch: usize) -> u64 {
    stream_id(b"train-epoch", epoch as u64)
}

/// Mean cross-entropy over `bags`.
pub fn mean_bag_loss(params: &MilParams, bags: &[Bag]) -> Result<f64> {
    if bags.is_empty() {
        return Err(Error::EmptyInput("bags"));
    }
    let mut total = 0.0;
    for bag in bags {
        total += bag_loss(params, bag)?;
    }
    Ok(total / bags.len() as f64)
}

/// One epoch of fresh bags. Each batch's gradient is the mean of its bag
/// gradients, accumulated in bag order, followed by one Adam step. Returns
/// the mean training loss over all bags of the epoch.
pub fn train_epoch<S: Borrow<LabeledStore>>(
    params: &mut MilParams,
    state: &mut AdamState,
    train: &[S],
    cfg: &TrainConfig,
    epoch: usize,
) -> Result<f64> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::EmptyInput("training slides"));
    }
    let mut rng = RngStream::new(cfg.seed, epoch_stream(epoch));
    let mut loss_sum = 0.0;
    let mut remaining = cfg.bags_per_epoch;
    while remaining > 0 {
        let batch = remaining.min(cfg.batch_size);
        let mut grad_sum = MilParams::zeros(params.attention_dim(), params.embed_dim(), params.classes());
        for _ in 0..batch {
            let slide = train[rng.below(train.len())].borrow();
            let bag = sample_bag(&slide.store, Some(slide.label), cfg.bag_size, &mut rng)?;
            let (loss, grads) = backward(params, &bag)?;
            loss_sum += loss;
            for (acc, g) in grad_sum.tensors_mut().into_iter().zip(grads.tensors()) {
                acc.iter_mut().zip(g).for_each(|(a, b)| *a += b);
            }
        }
        let scale = 1.0 / batch as f64;
        for t in grad_sum.tensors_mut() {
            t.iter_mut().for_each(|v| *v *= scale);
        }
        adam_step(
            params,
            &grad_sum,
            state,
            cfg.learning_rate,
            cfg.weight_decay,
            cfg.decoupled_weight_decay,
        )?;
        remaining -= batch;
    }
    Ok(loss_sum / cfg.bags_per_epoch as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: Option<f64>,
}

/// Result of a full training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub final_params: MilParams,
    /// Parameters at the epoch with the lowest validation loss (the final
    /// parameters when there is no validation set).
    pub best_params: MilParams,
    pub best_epoch: usize,
    pub best_val_loss: Option<f64>,
    pub history: Vec<EpochRecord>,
}

impl BagModel for TrainOutcome {
    fn predict(&self, bag: &Bag) -> Result<BagOutput> {
        forward(&self.best_params, bag)
    }
}

/// Initializes a head from `cfg.seed` and trains it for `cfg.epochs`.
/// Validation bags are fixed once up front.
pub fn train_model<S: Borrow<LabeledStore>, V: Borrow<LabeledStore>>(
    train: &[S],
    val: &[V],
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let first = train.first().ok_or(Error::EmptyInput("training slides"))?;
    let dim = first.borrow().store.dim();
    for s in train.iter().map(Borrow::borrow).chain(val.iter().map(Borrow::borrow)) {
        if s.store.dim() != dim {
            return Err(Error::DimMismatch {
                what: "store embedding dim",
                expected: dim,
                found: s.store.dim(),
            });
        }
        if s.label >= HER2_CLASSES {
            return Err(Error::ClassOutOfRange {
                class: s.label,
                classes: HER2_CLASSES,
            });
        }
    }
    let mut init_rng = RngStream::new(cfg.seed, stream_id(b"init", 0));
    let mut params = init_params(cfg.attention_dim, dim, HER2_CLASSES, &mut init_rng)?;
    let mut state = AdamState::new(&params);
    let val_bags = if val.is_empty() {
        Vec::new()
    } else {
        fixed_bags(val, cfg.val_bags, cfg.bag_size, cfg.seed)?
    };

    let mut best_params = params.clone();
    let mut best_epoch = 0;
    let mut best_val_loss: Option<f64> = None;
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let train_loss = train_epoch(&mut params, &mut state, train, cfg, epoch)?;
        let val_loss = if val_bags.is_empty() {
            None
        } else {
            Some(mean_bag_loss(&params, &val_bags)?)
        };
        match val_loss {
            Some(v) if best_val_loss.is_none_or(|b| v < b) => {
                best_val_loss = Some(v);
                best_params = params.clone();
                best_epoch = epoch;
            }
            None => {
                best_params = params.clone();
                best_epoch = epoch;
            }
            _ => {}
        }
        history.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
        });
    }
    Ok(TrainOutcome {
        final_params: params,
        best_params,
        best_epoch,
        best_val_loss,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::{Embedding, EmbeddingStore};
    use alloc::format;
    use alloc::vec;

    /// Each slide's patches are one-hot in a background bin, except a few
    /// carrying a class-specific bin.
    fn separable(slides_per_class: usize) -> Vec<LabeledStore> {
        let mut out = Vec::new();
        for class in 0..4 {
            for s in 0..slides_per_class {
                let mut store = EmbeddingStore::new(format!("c{class}s{s}"), 6);
                for i in 0..20u32 {
                    let mut v = vec![0.0f32; 6];
                    if i % 5 == 0 {
                        v[class] = 1.0;
                    } else {
                        v[4] = 0.7;
                        v[5] = 0.3;
                    }
                    store.push(i, s as u32, Embedding::new(v).unwrap()).unwrap();
                }
                out.push(LabeledStore::new(store, class));
            }
        }
        out
    }

    fn small_cfg(epochs: usize) -> TrainConfig {
        TrainConfig {
            bag_size: 10,
            bags_per_epoch: 64,
            val_bags: 16,
            test_bags: 16,
            batch_size: 16,
            attention_dim: 8,
            learning_rate: 1e-2,
            weight_decay: 0.0,
            seed: 3,
            ..TrainConfig::desk(epochs)
        }
    }

    #[test]
    fn one_batch_means_one_step() {
        let data = separable(1);
        let cfg = TrainConfig {
            bags_per_epoch: 64,
            batch_size: 64,
            ..small_cfg(1)
        };
        let mut p = init_params(8, 6, 4, &mut RngStream::new(0, 0)).unwrap();
        let mut s = AdamState::new(&p);
        train_epoch(&mut p, &mut s, &data, &cfg, 0).unwrap();
        assert_eq!(s.t, 1);
        let cfg = TrainConfig {
            bags_per_epoch: 65,
            ..cfg
        };
        train_epoch(&mut p, &mut s, &data, &cfg, 1).unwrap();
        assert_eq!(s.t, 3);
    }

    #[test]
    fn reported_loss_is_mean_of_bag_losses() {
        // one bag per batch: the reported loss must equal the loss of that
        // bag under the pre-step parameters
        let data = separable(1);
        let cfg = TrainConfig {
            bags_per_epoch: 1,
            batch_size: 1,
            ..small_cfg(1)
        };
        let p0 = init_params(8, 6, 4, &mut RngStream::new(0, 0)).unwrap();
        let mut rng = RngStream::new(cfg.seed, epoch_stream(0));
        let slide = &data[rng.below(data.len())];
        let bag = sample_bag(&slide.store, Some(slide.label), cfg.bag_size, &mut rng).unwrap();
        let expected = bag_loss(&p0, &bag).unwrap();
        let mut p = p0.clone();
        let mut s = AdamState::new(&p);
        let got = train_epoch(&mut p, &mut s, &data, &cfg, 0).unwrap();
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn training_is_bit_deterministic() {
        let data = separable(2);
        let a = train_model(&data, &data[..2], &small_cfg(3)).unwrap();
        let b = train_model(&data, &data[..2], &small_cfg(3)).unwrap();
        let bits = |p: &MilParams| p.to_flat().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.final_params), bits(&b.final_params));
        assert_eq!(a.history, b.history);
    }

    #[test]
    fn loss_decreases_on_separable_task() {
        let data = separable(2);
        let out = train_model(&data, &data, &small_cfg(50)).unwrap();
        let first = out.history[0].train_loss;
        let last = out.history.last().unwrap().train_loss;
        assert!(last < 0.5 * first, "first {first} last {last}");
        assert!(out.best_val_loss.unwrap() <= out.history[0].val_loss.unwrap());
    }

    #[test]
    fn rejects_bad_inputs() {
        let data = separable(1);
        let empty: [LabeledStore; 0] = [];
        assert!(train_model(&empty, &data, &small_cfg(1)).is_err());
        let bad = TrainConfig {
            learning_rate: 0.0,
            ..small_cfg(1)
        };
        assert!(train_model(&data, &empty, &bad).is_err());
        let mut wrong = data.clone();
        wrong[0].label = 4;
        assert!(train_model(&wrong, &empty, &small_cfg(1)).is_err());
    }
}
