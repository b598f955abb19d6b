//! Bag sampling, Adam, the epoch loop and the learning-rate × weight-decay
//! grid search.

mod adam;
mod config;
mod epoch;
mod grid;
mod sampling;

pub use adam::{adam_step, AdamState, ADAM_BETA1, ADAM_BETA2, ADAM_EPSILON};
pub use config::TrainConfig;
pub use epoch::{mean_bag_loss, train_epoch, train_model, EpochRecord, TrainOutcome};
pub use grid::{grid_search, grid_search_with, GridCell, GridResult, DEFAULT_LR_GRID, DEFAULT_WD_GRID};
pub use sampling::{fixed_bags, sample_bag, LabeledStore};
