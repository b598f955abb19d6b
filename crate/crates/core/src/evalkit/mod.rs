//! K-fold cross-evaluation with a fixed test set, multi-class metrics and
//! normal-approximation confidence intervals.

mod ci;
mod crossval;
mod metrics;
mod plan;

pub use ci::{confidence_interval, CiResult, CI_Z};
pub use crossval::{
    cross_evaluate, evaluate_bags, run_fold, summarize, CrossEvalReport, FoldEvaluation, FoldOutcome, FoldTrainer,
    MetricSummary, MilTrainer,
};
pub use metrics::{
    argmax, binary_auc, confusion, prf_macro, roc_auc_ovr, roc_curve, AucReport, ConfusionMatrix, FoldMetrics,
    PrfReport, RocPoint,
};
pub use plan::{kfold_split, FoldPlan};
