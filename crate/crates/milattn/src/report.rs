//! CSV and JSON outputs. Floats use Rust's shortest round-trip formatting,
//! so equal values always produce equal bytes.

use std::fmt::Write as _;
use std::path::Path;

use milattn_core::evalkit::{roc_curve, CiResult, FoldEvaluation, FoldMetrics, FoldPlan, MetricSummary};
use milattn_core::slidescore::{HeatCell, SlideScore};
use milattn_core::trainer::{EpochRecord, TrainConfig};
use serde::Serialize;

use crate::error::Result;
use crate::imageio::write_file;

fn num(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else {
        format!("{v}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("report serializes");
    bytes.push(b'\n');
    write_file(path, &bytes)
}

/// `epoch,train_loss,val_loss,lr,wd,seed`; `val_loss` is empty without a
/// validation set.
pub fn training_log_csv(history: &[EpochRecord], cfg: &TrainConfig) -> String {
    let mut out = String::from("epoch,train_loss,val_loss,lr,wd,seed\n");
    for r in history {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.epoch,
            num(r.train_loss),
            opt(r.val_loss),
            num(cfg.learning_rate),
            num(cfg.weight_decay),
            cfg.seed
        );
    }
    out
}

/// Per-fold metrics, one row per fold.
pub fn fold_metrics_csv(folds: &[&FoldMetrics]) -> String {
    let mut out = String::from("fold,precision,recall,f1,auc_roc,accuracy,balanced_accuracy\n");
    for (i, m) in folds.iter().enumerate() {
        let _ = writeln!(
            out,
            "{i},{},{},{},{},{},{}",
            num(m.prf.macro_precision),
            num(m.prf.macro_recall),
            num(m.prf.macro_f1),
            opt(m.auc.macro_auc),
            num(m.accuracy),
            num(m.balanced_accuracy)
        );
    }
    out
}

/// Summary in the layout of a results table: one row per metric with its
/// mean and 95% half-width across folds.
pub fn summary_table_csv(summary: &MetricSummary) -> String {
    let mut out = String::from("metric,mean,ci95_half_width,folds\n");
    let mut row = |name: &str, ci: Option<&CiResult>| match ci {
        Some(c) => {
            let _ = writeln!(out, "{name},{},{},{}", num(c.mean), num(c.half_width), c.k);
        }
        None => {
            let _ = writeln!(out, "{name},,,0");
        }
    };
    row("precision", Some(&summary.precision));
    row("recall", Some(&summary.recall));
    row("f1", Some(&summary.f1));
    row("auc_roc", summary.auc.as_ref());
    row("accuracy", Some(&summary.accuracy));
    row("balanced_accuracy", Some(&summary.balanced_accuracy));
    for (c, ci) in summary.per_class_auc.iter().enumerate() {
        row(&format!("auc_roc_class_{c}"), ci.as_ref());
    }
    out
}

/// One-vs-rest ROC points for every fold and class:
/// `fold,class,threshold,fpr,tpr`.
pub fn roc_points_csv(evaluations: &[&FoldEvaluation], classes: usize) -> String {
    let mut out = String::from("fold,class,threshold,fpr,tpr\n");
    for (f, ev) in evaluations.iter().enumerate() {
        for c in 0..classes {
            let scores: Vec<f64> = ev.scores.iter().map(|s| s[c]).collect();
            let positive: Vec<bool> = ev.labels.iter().map(|&l| l == c).collect();
            for p in roc_curve(&scores, &positive) {
                let _ = writeln!(out, "{f},{c},{},{},{}", num(p.threshold), num(p.fpr), num(p.tpr));
            }
        }
    }
    out
}

/// `x,y,count,mean_p`, sorted by `(y, x)`. `scale` multiplies the means.
pub fn heatmap_csv(cells: &[HeatCell], scale: f64) -> String {
    let mut out = String::from("x,y,count,mean_p\n");
    for c in cells {
        let _ = writeln!(out, "{},{},{},{}", c.x, c.y, c.count, num(c.mean * scale));
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct FoldReport<'a> {
    pub fold: usize,
    pub train_slides: &'a [String],
    pub val_slides: &'a [String],
    pub best_epoch: usize,
    pub best_val_loss: Option<f64>,
    pub checkpoint: String,
    pub metrics: &'a FoldMetrics,
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossvalReport<'a, P: Serialize> {
    pub provenance: &'a P,
    pub plan: &'a FoldPlan,
    pub test_slides: &'a [String],
    pub test_bags: usize,
    pub folds: Vec<FoldReport<'a>>,
    pub summary: &'a MetricSummary,
}

pub fn score_json(score: &SlideScore) -> serde_json::Value {
    serde_json::json!({
        "slide_id": score.slide_id,
        "probs": score.probs,
        "predicted": score.predicted,
        "n_samples": score.n_samples,
        "seed": score.seed,
    })
}
