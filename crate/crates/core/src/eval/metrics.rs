//! Classification, regression and agreement scores.

use alloc::vec::Vec;

use super::EvalError;
use crate::num;
use crate::stats;

/// Quality-control scores for the include class (label 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassificationMetrics {
    pub weighted_f1: f64,
    /// `None` when only one class is present.
    pub auc: Option<f64>,
    pub precision: f64,
    pub recall: f64,
}

/// Quality-assessment scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionMetrics {
    /// Coefficient of determination; `None` when the truth is constant.
    pub r2: Option<f64>,
    /// `None` when either side is constant.
    pub spearman: Option<f64>,
    pub mae: f64,
}

fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

/// ROC AUC by the Mann–Whitney statistic with midranks for ties.
pub fn roc_auc(y_true: &[u8], score: &[f64]) -> Option<f64> {
    let n1 = y_true.iter().filter(|&&y| y == 1).count();
    let n0 = y_true.len() - n1;
    if n1 == 0 || n0 == 0 {
        return None;
    }
    let ranks = stats::average_ranks(score);
    let r1: f64 = ranks.iter().zip(y_true).filter(|(_, &y)| y == 1).map(|(r, _)| r).sum();
    let u = r1 - (n1 * (n1 + 1)) as f64 / 2.0;
    Some(u / (n1 as f64 * n0 as f64))
}

/// Scores `score >= threshold` as include. Weighted F1 averages the per-class
/// F1 by class support; undefined ratios count as zero.
pub fn classification_metrics(y_true: &[u8], score: &[f64], threshold: f64) -> Result<ClassificationMetrics, EvalError> {
    if y_true.is_empty() || y_true.len() != score.len() {
        return Err(EvalError::LengthMismatch);
    }
    let pred: Vec<u8> = score.iter().map(|&s| u8::from(s >= threshold)).collect();
    Ok(metrics_from_labels(y_true, &pred, roc_auc(y_true, score)))
}

pub(crate) fn metrics_from_labels(y_true: &[u8], pred: &[u8], auc: Option<f64>) -> ClassificationMetrics {
    let mut c = [[0usize; 2]; 2];
    for (&t, &p) in y_true.iter().zip(pred) {
        c[t as usize][p as usize] += 1;
    }
    let f1_of = |k: usize| {
        let tp = c[k][k] as f64;
        let fp = c[1 - k][k] as f64;
        let fn_ = c[k][1 - k] as f64;
        let (p, r) = (ratio(tp, tp + fp), ratio(tp, tp + fn_));
        (ratio(2.0 * p * r, p + r), p, r)
    };
    let (f0, _, _) = f1_of(0);
    let (f1, precision, recall) = f1_of(1);
    let s0 = (c[0][0] + c[0][1]) as f64;
    let s1 = (c[1][0] + c[1][1]) as f64;
    ClassificationMetrics { weighted_f1: (f0 * s0 + f1 * s1) / (s0 + s1), auc, precision, recall }
}

pub fn mean_absolute_error(y_true: &[f64], y_pred: &[f64]) -> f64 {
    y_true.iter().zip(y_pred).map(|(a, b)| num::abs(a - b)).sum::<f64>() / y_true.len() as f64
}

/// Coefficient of determination `1 - SSE / SST` (may be negative).
pub fn r2_score(y_true: &[f64], y_pred: &[f64]) -> Option<f64> {
    let m = stats::mean(y_true);
    let sst: f64 = y_true.iter().map(|y| (y - m) * (y - m)).sum();
    if sst == 0.0 {
        return None;
    }
    let sse: f64 = y_true.iter().zip(y_pred).map(|(a, b)| (a - b) * (a - b)).sum();
    Some(1.0 - sse / sst)
}

pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    stats::pearson(&stats::average_ranks(a), &stats::average_ranks(b))
}

pub fn regression_metrics(y_true: &[f64], y_pred: &[f64]) -> Result<RegressionMetrics, EvalError> {
    if y_true.len() < 2 || y_true.len() != y_pred.len() {
        return Err(EvalError::LengthMismatch);
    }
    Ok(RegressionMetrics { r2: r2_score(y_true, y_pred), spearman: spearman(y_true, y_pred), mae: mean_absolute_error(y_true, y_pred) })
}

/// Agreement between two raters on the same stacks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Agreement {
    pub n: usize,
    pub pearson: Option<f64>,
    /// Cohen's κ on include/exclude; `None` when chance agreement is 1.
    pub kappa: Option<f64>,
}

/// Cohen's κ of two binary label lists.
pub fn cohen_kappa(a: &[u8], b: &[u8]) -> Option<f64> {
    let n = a.len() as f64;
    if a.is_empty() {
        return None;
    }
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / n;
    let pa = a.iter().filter(|&&x| x == 1).count() as f64 / n;
    let pb = b.iter().filter(|&&x| x == 1).count() as f64 / n;
    let pe = pa * pb + (1.0 - pa) * (1.0 - pb);
    if pe >= 1.0 {
        return None;
    }
    Some((agree - pe) / (1.0 - pe))
}

/// Pearson R on the raw ratings and κ after binarizing at `exclude_threshold`
/// (ratings below it are exclusions).
pub fn agreement_metrics(a: &[f64], b: &[f64], exclude_threshold: f64) -> Result<Agreement, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch);
    }
    if a.len() < 2 {
        return Err(EvalError::NoOverlap);
    }
    let bin = |v: &[f64]| -> Vec<u8> { v.iter().map(|&r| u8::from(r >= exclude_threshold)).collect() };
    Ok(Agreement { n: a.len(), pearson: stats::pearson(a, b), kappa: cohen_kappa(&bin(a), &bin(b)) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_classification_case() {
        let m = classification_metrics(&[1, 1, 0, 0], &[0.9, 0.4, 0.6, 0.1], 0.5).unwrap();
        assert_eq!(m.auc, Some(0.75));
        assert_eq!((m.precision, m.recall, m.weighted_f1), (0.5, 0.5, 0.5));
        let p = classification_metrics(&[1, 0, 1], &[0.8, 0.2, 0.9], 0.5).unwrap();
        assert_eq!((p.weighted_f1, p.auc, p.precision, p.recall), (1.0, Some(1.0), 1.0, 1.0));
        assert_eq!(classification_metrics(&[0, 0], &[0.1, 0.7], 0.5).unwrap().auc, None);
    }

    #[test]
    fn hand_regression_case() {
        let m = regression_metrics(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap();
        assert_eq!(m.r2, Some(-3.0));
        assert!((m.spearman.unwrap() + 1.0).abs() < 1e-15);
        assert!((m.mae - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(r2_score(&[1.0, 2.0, 3.0], &[2.0; 3]), Some(0.0));
        assert_eq!(r2_score(&[2.0; 3], &[2.0; 3]), None);
    }

    #[test]
    fn kappa_contingency_case() {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (x, y, n) in [(1, 1, 40), (0, 0, 40), (1, 0, 10), (0, 1, 10)] {
            for _ in 0..n {
                a.push(x);
                b.push(y);
            }
        }
        assert!((cohen_kappa(&a, &b).unwrap() - 0.6).abs() < 1e-12);
        assert_eq!(cohen_kappa(&[1, 1], &[1, 1]), None);
    }
}
