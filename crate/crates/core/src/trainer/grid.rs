use alloc::vec::Vec;
use core::borrow::Borrow;

use super::config::TrainConfig;
use super::epoch::train_model;
use super::sampling::LabeledStore;
use crate::error::{Error, Result};

/// Learning rates searched in the full-size protocol.
pub const DEFAULT_LR_GRID: [f64; 4] = [1e-3, 1e-4, 1e-5, 1e-6];
/// Weight decays searched in the full-size protocol.
pub const DEFAULT_WD_GRID: [f64; 5] = [1e-3, 1e-4, 1e-5, 1e-6, 1e-7];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    /// Every evaluated pair, learning-rate major in grid order.
    pub cells: Vec<GridCell>,
    pub best: GridCell,
}

/// Evaluates `eval(lr, wd)` on every grid pair and keeps the lowest loss.
/// Ties go to the smaller learning rate, then the smaller weight decay.
/// Non-finite losses never win.
pub fn grid_search_with<F>(lr_grid: &[f64], wd_grid: &[f64], mut eval: F) -> Result<GridResult>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    if lr_grid.is_empty() || wd_grid.is_empty() {
        return Err(Error::EmptyInput("search grid"));
    }
    let mut cells = Vec::with_capacity(lr_grid.len() * wd_grid.len());
    for &lr in lr_grid {
        for &wd in wd_grid {
            cells.push(GridCell {
                learning_rate: lr,
                weight_decay: wd,
                val_loss: eval(lr, wd)?,
            });
        }
    }
    let key = |c: &GridCell| {
        let loss = if c.val_loss.is_finite() {
            c.val_loss
        } else {
            f64::INFINITY
        };
        (loss, c.learning_rate, c.weight_decay)
    };
    let best = *cells
        .iter()
        .min_by(|a, b| {
            let (ka, kb) = (key(a), key(b));
            ka.0.total_cmp(&kb.0)
                .then(ka.1.total_cmp(&kb.1))
                .then(ka.2.total_cmp(&kb.2))
        })
        .expect("grid is non-empty");
    Ok(GridResult { cells, best })
}

/// Trains one model per `(lr, wd)` pair from the same initialization and
/// scores it by its best validation loss.
pub fn grid_search<S: Borrow<LabeledStore>, V: Borrow<LabeledStore>>(
    train: &[S],
    val: &[V],
    lr_grid: &[f64],
    wd_grid: &[f64],
    cfg: &TrainConfig,
) -> Result<GridResult> {
    if val.is_empty() {
        return Err(Error::EmptyInput("validation slides"));
    }
    grid_search_with(lr_grid, wd_grid, |lr, wd| {
        let cfg = TrainConfig {
            learning_rate: lr,
            weight_decay: wd,
            ..cfg.clone()
        };
        let outcome = train_model(train, val, &cfg)?;
        Ok(outcome.best_val_loss.expect("validation set is non-empty"))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_has_twenty_cells() {
        let mut calls = 0;
        let r = grid_search_with(&DEFAULT_LR_GRID, &DEFAULT_WD_GRID, |_, _| {
            calls += 1;
            Ok(1.0)
        })
        .unwrap();
        assert_eq!(calls, 20);
        assert_eq!(r.cells.len(), 20);
        // all tied: smallest lr, then smallest wd
        assert_eq!((r.best.learning_rate, r.best.weight_decay), (1e-6, 1e-7));
    }

    #[test]
    fn single_cell() {
        let r = grid_search_with(&[0.5], &[0.25], |_, _| Ok(3.0)).unwrap();
        assert_eq!(
            (r.best.learning_rate, r.best.weight_decay, r.best.val_loss),
            (0.5, 0.25, 3.0)
        );
    }

    #[test]
    fn injected_minimum_is_selected() {
        let r = grid_search_with(&DEFAULT_LR_GRID, &DEFAULT_WD_GRID, |lr, wd| {
            Ok(if lr == 1e-4 && wd == 1e-5 { 0.1 } else { 1.0 + lr + wd })
        })
        .unwrap();
        assert_eq!((r.best.learning_rate, r.best.weight_decay), (1e-4, 1e-5));
    }

    #[test]
    fn nan_never_wins_and_empty_grid_errors() {
        let r = grid_search_with(&[1.0, 2.0], &[0.0], |lr, _| Ok(if lr == 1.0 { f64::NAN } else { 5.0 })).unwrap();
        assert_eq!(r.best.learning_rate, 2.0);
        assert!(grid_search_with(&[], &[1.0], |_, _| Ok(0.0)).is_err());
    }
}
