use alloc::format;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::milhead::DEFAULT_ATTENTION_DIM;

fn d_bag_size() -> usize {
    100
}
fn d_bags_per_epoch() -> usize {
    6400
}
fn d_eval_bags() -> usize {
    2500
}
fn d_batch_size() -> usize {
    64
}
fn d_learning_rate() -> f64 {
    1e-4
}
fn d_weight_decay() -> f64 {
    1e-5
}
fn d_attention_dim() -> usize {
    DEFAULT_ATTENTION_DIM
}

/// Training hyper-parameters. Missing fields take the full-size defaults
/// (bags of 100, 6400 training bags per epoch, 2500 validation and test
/// bags, batches of 64); `epochs` has no default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    #[serde(default = "d_bag_size")]
    pub bag_size: usize,
    #[serde(default = "d_bags_per_epoch")]
    pub bags_per_epoch: usize,
    #[serde(default = "d_eval_bags")]
    pub val_bags: usize,
    #[serde(default = "d_eval_bags")]
    pub test_bags: usize,
    #[serde(default = "d_batch_size")]
    pub batch_size: usize,
    pub epochs: usize,
    #[serde(default = "d_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "d_weight_decay")]
    pub weight_decay: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "d_attention_dim")]
    pub attention_dim: usize,
    /// Apply weight decay directly to the weights (AdamW) instead of adding
    /// it to the gradient.
    #[serde(default)]
    pub decoupled_weight_decay: bool,
}

impl TrainConfig {
    /// Full-size protocol budgets.
    pub fn paper(epochs: usize) -> Self {
        Self {
            bag_size: d_bag_size(),
            bags_per_epoch: d_bags_per_epoch(),
            val_bags: d_eval_bags(),
            test_bags: d_eval_bags(),
            batch_size: d_batch_size(),
            epochs,
            learning_rate: d_learning_rate(),
            weight_decay: d_weight_decay(),
            seed: 0,
            attention_dim: d_attention_dim(),
            decoupled_weight_decay: false,
        }
    }

    /// Budgets small enough for a laptop run on synthetic slides.
    pub fn desk(epochs: usize) -> Self {
        Self {
            bag_size: 20,
            bags_per_epoch: 256,
            val_bags: 128,
            test_bags: 128,
            attention_dim: 32,
            learning_rate: 1e-3,
            ..Self::paper(epochs)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("bag_size", self.bag_size),
            ("bags_per_epoch", self.bags_per_epoch),
            ("val_bags", self.val_bags),
            ("test_bags", self.test_bags),
            ("batch_size", self.batch_size),
            ("epochs", self.epochs),
            ("attention_dim", self.attention_dim),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be >= 1")));
            }
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "learning_rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "weight_decay must be >= 0, got {}",
                self.weight_decay
            )));
        }
        Ok(())
    }
}
