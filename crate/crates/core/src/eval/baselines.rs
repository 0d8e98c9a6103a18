//! Reference methods the forest is compared against.

use alloc::vec::Vec;

use crate::num;
use crate::stats;

/// Fraction of the subject's median brain volume below which a stack is excluded.
pub const NIFTYMIC_VOLUME_FRACTION: f64 = 0.7;

fn subject_groups<'a>(subjects: &[&'a str]) -> Vec<(&'a str, Vec<usize>)> {
    let mut groups: Vec<(&str, Vec<usize>)> = Vec::new();
    for (i, &s) in subjects.iter().enumerate() {
        match groups.iter_mut().find(|(g, _)| *g == s) {
            Some((_, v)) => v.push(i),
            None => groups.push((s, alloc::vec![i])),
        }
    }
    groups
}

/// Brain volume relative to the subject median, per stack. The stack is
/// included when the ratio is at least [`NIFTYMIC_VOLUME_FRACTION`].
pub fn niftymic_volume_ratio(subjects: &[&str], mask_volumes: &[f64]) -> Vec<f64> {
    let mut out = alloc::vec![0.0; subjects.len()];
    for (_, idx) in subject_groups(subjects) {
        let vols: Vec<f64> = idx.iter().map(|&i| mask_volumes[i]).collect();
        let med = stats::median(&vols);
        for &i in &idx {
            out[i] = if med > 0.0 { mask_volumes[i] / med } else { 0.0 };
        }
    }
    out
}

/// Include (1) / exclude (0) by the subject-median volume rule.
pub fn baseline_niftymic_qc(subjects: &[&str], mask_volumes: &[f64]) -> Vec<u8> {
    niftymic_volume_ratio(subjects, mask_volumes).into_iter().map(|r| u8::from(r >= NIFTYMIC_VOLUME_FRACTION)).collect()
}

/// Every stack receives the mean rating of its subject's stacks.
pub fn baseline_subject_oracle(subjects: &[&str], ratings: &[f64]) -> Vec<f64> {
    let mut out = alloc::vec![0.0; subjects.len()];
    for (_, idx) in subject_groups(subjects) {
        let m = idx.iter().map(|&i| ratings[i]).sum::<f64>() / idx.len() as f64;
        for &i in &idx {
            out[i] = m;
        }
    }
    out
}

/// One-dimensional logistic model `p = σ(a + b·x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticFit {
    pub intercept: f64,
    pub slope: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl LogisticFit {
    pub fn probability(&self, x: f64) -> f64 {
        1.0 / (1.0 + num::exp(-(self.intercept + self.slope * x)))
    }

    /// Score at which the probability crosses one half.
    pub fn decision_threshold(&self) -> Option<f64> {
        (self.slope != 0.0).then(|| -self.intercept / self.slope)
    }
}

/// Newton–Raphson logistic regression of binary `y` on one score column
/// (at most 100 steps, stopping when the step norm falls below 1e-8). A tiny
/// ridge term keeps separable data finite.
pub fn fit_logistic_1d(x: &[f64], y: &[u8]) -> LogisticFit {
    const MAX_ITER: usize = 100;
    const TOL: f64 = 1e-8;
    const RIDGE: f64 = 1e-6;
    let (mut a, mut b) = (0.0f64, 0.0f64);
    for it in 1..=MAX_ITER {
        let (mut ga, mut gb, mut haa, mut hab, mut hbb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&xi, &yi) in x.iter().zip(y) {
            let p = 1.0 / (1.0 + num::exp(-(a + b * xi)));
            let r = f64::from(yi) - p;
            let w = p * (1.0 - p);
            ga += r;
            gb += r * xi;
            haa += w;
            hab += w * xi;
            hbb += w * xi * xi;
        }
        ga -= RIDGE * a;
        gb -= RIDGE * b;
        haa += RIDGE;
        hbb += RIDGE;
        let det = haa * hbb - hab * hab;
        if det <= 0.0 || !det.is_finite() {
            return LogisticFit { intercept: a, slope: b, iterations: it, converged: false };
        }
        let da = (hbb * ga - hab * gb) / det;
        let db = (haa * gb - hab * ga) / det;
        a += da;
        b += db;
        if num::sqrt(da * da + db * db) < TOL {
            return LogisticFit { intercept: a, slope: b, iterations: it, converged: true };
        }
    }
    LogisticFit { intercept: a, slope: b, iterations: MAX_ITER, converged: false }
}
