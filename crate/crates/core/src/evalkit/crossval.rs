use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::ci::{confidence_interval, CiResult};
use super::metrics::FoldMetrics;
use super::plan::FoldPlan;
use crate::error::{Error, Result};
use crate::milhead::{Bag, BagModel};
use crate::trainer::{fixed_bags, train_model, LabeledStore, TrainConfig, TrainOutcome};
use crate::HER2_CLASSES;

/// Produces one model per fold from that fold's training and validation
/// slides.
pub trait FoldTrainer {
    type Model: BagModel;

    fn train_fold(&self, fold: usize, train: &[&LabeledStore], val: &[&LabeledStore]) -> Result<Self::Model>;
}

/// Trains the attention head with [`train_model`]; the held-out fold is the
/// validation set.
#[derive(Debug, Clone)]
pub struct MilTrainer {
    pub cfg: TrainConfig,
}

impl FoldTrainer for MilTrainer {
    type Model = TrainOutcome;

    fn train_fold(&self, _fold: usize, train: &[&LabeledStore], val: &[&LabeledStore]) -> Result<TrainOutcome> {
        train_model(train, val, &self.cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldEvaluation {
    /// Class probabilities per test bag.
    pub scores: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub metrics: FoldMetrics,
}

pub fn evaluate_bags<M: BagModel + ?Sized>(model: &M, bags: &[Bag]) -> Result<FoldEvaluation> {
    let mut scores = Vec::with_capacity(bags.len());
    let mut labels = Vec::with_capacity(bags.len());
    for bag in bags {
        let out = model.predict(bag)?;
        if out.probs.len() != HER2_CLASSES {
            return Err(Error::DimMismatch {
                what: "model classes",
                expected: HER2_CLASSES,
                found: out.probs.len(),
            });
        }
        scores.push(out.probs.into_vec());
        labels.push(bag.label().ok_or(Error::MissingLabel)?);
    }
    let metrics = FoldMetrics::compute(&scores, &labels, HER2_CLASSES)?;
    Ok(FoldEvaluation {
        scores,
        labels,
        metrics,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldOutcome<M> {
    pub fold: usize,
    pub model: M,
    pub train_slides: Vec<String>,
    pub val_slides: Vec<String>,
    pub evaluation: FoldEvaluation,
}

/// Trains on the `k − 1` folds other than `fold`, validates on `fold` and
/// evaluates on the shared test bags.
pub fn run_fold<T: FoldTrainer>(
    trainer: &T,
    plan: &FoldPlan,
    fold: usize,
    train: &[LabeledStore],
    test_bags: &[Bag],
) -> Result<FoldOutcome<T::Model>> {
    if plan.assignment.len() != train.len() {
        return Err(Error::DimMismatch {
            what: "fold plan",
            expected: train.len(),
            found: plan.assignment.len(),
        });
    }
    if fold >= plan.k {
        return Err(Error::IndexOutOfRange {
            index: fold,
            len: plan.k,
        });
    }
    let fit: Vec<&LabeledStore> = plan.training(fold).into_iter().map(|i| &train[i]).collect();
    let val: Vec<&LabeledStore> = plan.held_out(fold).into_iter().map(|i| &train[i]).collect();
    let model = trainer.train_fold(fold, &fit, &val)?;
    let evaluation = evaluate_bags(&model, test_bags)?;
    Ok(FoldOutcome {
        fold,
        model,
        train_slides: fit.iter().map(|s| s.slide_id().into()).collect(),
        val_slides: val.iter().map(|s| s.slide_id().into()).collect(),
        evaluation,
    })
}

/// Mean and 95% interval of each macro metric across folds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub precision: CiResult,
    pub recall: CiResult,
    pub f1: CiResult,
    pub accuracy: CiResult,
    pub balanced_accuracy: CiResult,
    /// Over folds where the macro AUC is defined.
    pub auc: Option<CiResult>,
    pub per_class_auc: Vec<Option<CiResult>>,
}

pub fn summarize(folds: &[&FoldMetrics]) -> Result<MetricSummary> {
    let collect = |f: &dyn Fn(&FoldMetrics) -> f64| -> Result<CiResult> {
        let values: Vec<f64> = folds.iter().map(|m| f(m)).collect();
        confidence_interval(&values)
    };
    let optional = |values: Vec<f64>| -> Result<Option<CiResult>> {
        if values.is_empty() {
            Ok(None)
        } else {
            confidence_interval(&values).map(Some)
        }
    };
    let classes = folds.first().map_or(0, |m| m.auc.per_class.len());
    let per_class_auc = (0..classes)
        .map(|c| optional(folds.iter().filter_map(|m| m.auc.per_class[c]).collect()))
        .collect::<Result<Vec<_>>>()?;
    Ok(MetricSummary {
        precision: collect(&|m| m.prf.macro_precision)?,
        recall: collect(&|m| m.prf.macro_recall)?,
        f1: collect(&|m| m.prf.macro_f1)?,
        accuracy: collect(&|m| m.accuracy)?,
        balanced_accuracy: collect(&|m| m.balanced_accuracy)?,
        auc: optional(folds.iter().filter_map(|m| m.auc.macro_auc).collect())?,
        per_class_auc,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossEvalReport<M> {
    pub plan: FoldPlan,
    pub test_slides: Vec<String>,
    pub folds: Vec<FoldOutcome<M>>,
    pub summary: MetricSummary,
}

/// Runs every fold of `plan` in order and summarizes the test metrics.
/// Test bags are drawn once from `test` with `test_seed` and shared by all
/// folds.
pub fn cross_evaluate<T: FoldTrainer>(
    trainer: &T,
    train: &[LabeledStore],
    test: &[LabeledStore],
    plan: &FoldPlan,
    test_bag_count: usize,
    bag_size: usize,
    test_seed: u64,
) -> Result<CrossEvalReport<T::Model>> {
    let test_bags = fixed_bags(test, test_bag_count, bag_size, test_seed)?;
    let folds = (0..plan.k)
        .map(|f| run_fold(trainer, plan, f, train, &test_bags))
        .collect::<Result<Vec<_>>>()?;
    let metrics: Vec<&FoldMetrics> = folds.iter().map(|f| &f.evaluation.metrics).collect();
    let summary = summarize(&metrics)?;
    Ok(CrossEvalReport {
        plan: plan.clone(),
        test_slides: test.iter().map(|s| s.slide_id().into()).collect(),
        folds,
        summary,
    })
}
