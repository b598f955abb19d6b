use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// `counts[t · classes + p]` is the number of samples with label `t`
/// predicted as `p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: usize,
    pub counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn zeros(classes: usize) -> Self {
        Self {
            classes,
            counts: vec![0; classes * classes],
        }
    }

    pub fn from_rows(rows: &[&[u64]]) -> Self {
        let classes = rows.len();
        let mut m = Self::zeros(classes);
        for (t, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), classes, "confusion matrix must be square");
            m.counts[t * classes..(t + 1) * classes].copy_from_slice(row);
        }
        m
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.classes + predicted]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn true_count(&self, class: usize) -> u64 {
        (0..self.classes).map(|p| self.get(class, p)).sum()
    }

    pub fn predicted_count(&self, class: usize) -> u64 {
        (0..self.classes).map(|t| self.get(t, class)).sum()
    }

    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        let correct: u64 = (0..self.classes).map(|c| self.get(c, c)).sum();
        correct as f64 / total as f64
    }
}

pub fn confusion(preds: &[usize], labels: &[usize], classes: usize) -> Result<ConfusionMatrix> {
    if preds.len() != labels.len() {
        return Err(Error::DimMismatch {
            what: "predictions vs labels",
            expected: labels.len(),
            found: preds.len(),
        });
    }
    let mut m = ConfusionMatrix::zeros(classes);
    for (&p, &t) in preds.iter().zip(labels) {
        for c in [p, t] {
            if c >= classes {
                return Err(Error::ClassOutOfRange { class: c, classes });
            }
        }
        m.counts[t * classes + p] += 1;
    }
    Ok(m)
}

/// Per-class precision, recall and F1 with unweighted (macro) means over the
/// classes that occur in the labels. A zero denominator yields 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrfReport {
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
    pub support: Vec<u64>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

pub fn prf_macro(m: &ConfusionMatrix) -> PrfReport {
    let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let c = m.classes;
    let mut precision = Vec::with_capacity(c);
    let mut recall = Vec::with_capacity(c);
    let mut f1 = Vec::with_capacity(c);
    let mut support = Vec::with_capacity(c);
    for k in 0..c {
        let tp = m.get(k, k);
        let p = ratio(tp, m.predicted_count(k));
        let r = ratio(tp, m.true_count(k));
        precision.push(p);
        recall.push(r);
        f1.push(if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 });
        support.push(m.true_count(k));
    }
    let present: Vec<usize> = (0..c).filter(|&k| support[k] > 0).collect();
    let mean = |xs: &[f64]| {
        if present.is_empty() {
            0.0
        } else {
            present.iter().map(|&k| xs[k]).sum::<f64>() / present.len() as f64
        }
    };
    PrfReport {
        macro_precision: mean(&precision),
        macro_recall: mean(&recall),
        macro_f1: mean(&f1),
        precision,
        recall,
        f1,
        support,
    }
}

/// Mann-Whitney AUC with midranks for ties: the probability that a random
/// positive outscores a random negative, counting ties as one half.
/// `None` when either group is empty.
pub fn binary_auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    assert_eq!(scores.len(), positive.len());
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j share their average
        let midrank = (i + 1 + j) as f64 / 2.0;
        rank_sum += midrank * order[i..j].iter().filter(|&&s| positive[s]).count() as f64;
        i = j;
    }
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Some(u / (n_pos as f64 * n_neg as f64))
}

/// One-vs-rest AUC per class plus their macro mean over defined classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AucReport {
    pub per_class: Vec<Option<f64>>,
    pub macro_auc: Option<f64>,
    /// Classes whose AUC is undefined (no positives or no negatives).
    pub undefined: Vec<usize>,
}

pub fn roc_auc_ovr(scores: &[Vec<f64>], labels: &[usize], classes: usize) -> Result<AucReport> {
    if scores.len() != labels.len() {
        return Err(Error::DimMismatch {
            what: "scores vs labels",
            expected: labels.len(),
            found: scores.len(),
        });
    }
    if let Some(bad) = scores.iter().find(|s| s.len() != classes) {
        return Err(Error::DimMismatch {
            what: "class score vector",
            expected: classes,
            found: bad.len(),
        });
    }
    let mut per_class = Vec::with_capacity(classes);
    let mut undefined = Vec::new();
    for c in 0..classes {
        let col: Vec<f64> = scores.iter().map(|s| s[c]).collect();
        let pos: Vec<bool> = labels.iter().map(|&l| l == c).collect();
        let auc = binary_auc(&col, &pos);
        if auc.is_none() {
            undefined.push(c);
        }
        per_class.push(auc);
    }
    let defined: Vec<f64> = per_class.iter().flatten().copied().collect();
    let macro_auc = if defined.is_empty() {
        None
    } else {
        Some(defined.iter().sum::<f64>() / defined.len() as f64)
    };
    Ok(AucReport {
        per_class,
        macro_auc,
        undefined,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// ROC curve points, one per distinct score, from `(0, 0)` to `(1, 1)`.
/// The first point has threshold `+∞`.
pub fn roc_curve(scores: &[f64], positive: &[bool]) -> Vec<RocPoint> {
    assert_eq!(scores.len(), positive.len());
    let n_pos = positive.iter().filter(|&&p| p).count() as f64;
    let n_neg = positive.len() as f64 - n_pos;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let rate = |count: f64, of: f64| if of > 0.0 { count / of } else { 0.0 };
    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let (mut tp, mut fp) = (0.0, 0.0);
    let mut i = 0;
    while i < order.len() {
        let t = scores[order[i]];
        while i < order.len() && scores[order[i]] == t {
            if positive[order[i]] {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
            i += 1;
        }
        points.push(RocPoint {
            threshold: t,
            fpr: rate(fp, n_neg),
            tpr: rate(tp, n_pos),
        });
    }
    points
}

/// Everything measured on one fold's test bags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub confusion: ConfusionMatrix,
    pub prf: PrfReport,
    pub auc: AucReport,
    pub accuracy: f64,
    /// Mean per-class recall over classes present in the labels.
    pub balanced_accuracy: f64,
}

impl FoldMetrics {
    pub fn compute(scores: &[Vec<f64>], labels: &[usize], classes: usize) -> Result<Self> {
        let preds: Vec<usize> = scores.iter().map(|s| argmax(s)).collect();
        let confusion = confusion(&preds, labels, classes)?;
        let prf = prf_macro(&confusion);
        let auc = roc_auc_ovr(scores, labels, classes)?;
        Ok(Self {
            accuracy: confusion.accuracy(),
            balanced_accuracy: prf.macro_recall,
            confusion,
            prf,
            auc,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn confusion_counts() {
        let m = confusion(&[0, 1, 2, 3], &[0, 1, 2, 3], 4).unwrap();
        assert_eq!(
            m,
            ConfusionMatrix::from_rows(&[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 1]])
        );
        assert_eq!(confusion(&[], &[], 4).unwrap(), ConfusionMatrix::zeros(4));
        let m = confusion(&[1, 1, 2, 2], &[0, 1, 2, 3], 4).unwrap();
        assert_eq!(
            m,
            ConfusionMatrix::from_rows(&[&[0, 1, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0], &[0, 0, 1, 0]])
        );
        assert_eq!(m.total(), 4);
        assert!(confusion(&[4], &[0], 4).is_err());
        assert!(confusion(&[0], &[], 4).is_err());
    }

    #[test]
    fn prf_diagonal() {
        let r = prf_macro(&ConfusionMatrix::from_rows(&[&[3, 0], &[0, 5]]));
        assert_eq!((r.macro_precision, r.macro_recall, r.macro_f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn prf_two_class_by_hand() {
        let r = prf_macro(&ConfusionMatrix::from_rows(&[&[1, 1], &[0, 2]]));
        assert_eq!(r.precision[0], 1.0);
        assert!((r.precision[1] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.recall, vec![0.5, 1.0]);
        assert!((r.f1[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.f1[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn absent_class_excluded_from_macro() {
        let r = prf_macro(&ConfusionMatrix::from_rows(&[&[2, 0, 0], &[0, 2, 0], &[0, 0, 0]]));
        assert_eq!(r.macro_precision, 1.0);
        assert_eq!(r.macro_recall, 1.0);
    }

    #[test]
    fn auc_cases() {
        assert_eq!(
            binary_auc(&[0.9, 0.8, 0.2, 0.1], &[true, true, false, false]),
            Some(1.0)
        );
        assert_eq!(binary_auc(&[0.1, 0.9], &[true, false]), Some(0.0));
        assert_eq!(
            binary_auc(&[0.9, 0.7, 0.8, 0.1], &[true, true, false, false]),
            Some(0.75)
        );
        assert_eq!(binary_auc(&[0.5, 0.5], &[true, false]), Some(0.5));
        assert_eq!(binary_auc(&[0.5, 0.4], &[true, true]), None);
    }

    #[test]
    fn ovr_flags_missing_classes() {
        let scores = vec![vec![0.7, 0.2, 0.1], vec![0.2, 0.7, 0.1]];
        let r = roc_auc_ovr(&scores, &[0, 1], 3).unwrap();
        assert_eq!(r.per_class, vec![Some(1.0), Some(1.0), None]);
        assert_eq!(r.undefined, vec![2]);
        assert_eq!(r.macro_auc, Some(1.0));
        assert!(roc_auc_ovr(&scores, &[0], 3).is_err());
    }

    #[test]
    fn roc_curve_endpoints() {
        let pts = roc_curve(&[0.9, 0.7, 0.8, 0.1], &[true, true, false, false]);
        assert_eq!(pts.first().map(|p| (p.fpr, p.tpr)), Some((0.0, 0.0)));
        assert_eq!(pts.last().map(|p| (p.fpr, p.tpr)), Some((1.0, 1.0)));
        assert_eq!(pts.len(), 5);
        // trapezoid area equals the rank AUC
        let area: f64 = pts
            .windows(2)
            .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
            .sum();
        assert!((area - 0.75).abs() < 1e-15);
    }

    #[test]
    fn argmax_prefers_lower_index_on_ties() {
        assert_eq!(argmax(&[0.25, 0.25, 0.25, 0.25]), 0);
        assert_eq!(argmax(&[0.1, 0.4, 0.4, 0.1]), 1);
    }
}
