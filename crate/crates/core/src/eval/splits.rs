//! Grouped train/evaluation split planners.

use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::EvalError;
use crate::record::{Split, StackRecord};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupingKey {
    Subject,
    Scanner,
}

impl GroupingKey {
    pub fn of(self, r: &StackRecord) -> &str {
        match self {
            GroupingKey::Subject => &r.subject_id,
            GroupingKey::Scanner => &r.scanner_id,
        }
    }
}

/// One fold, as indices into the record list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    /// Scanner id for scanner folds, fold number otherwise.
    pub label: String,
    pub train: Vec<usize>,
    pub eval: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPlan {
    pub folds: Vec<Fold>,
    pub grouping: GroupingKey,
    pub seed: u64,
}

impl SplitPlan {
    /// True when no group appears on both sides of any fold.
    pub fn is_leak_free(&self, records: &[StackRecord]) -> bool {
        self.folds.iter().all(|f| {
            let train: Vec<&str> = f.train.iter().map(|&i| self.grouping.of(&records[i])).collect();
            f.eval.iter().all(|&i| !train.contains(&self.grouping.of(&records[i])))
        })
    }
}

/// Distinct values in order of first appearance.
pub(crate) fn distinct<'a>(keys: impl IntoIterator<Item = &'a str>) -> Vec<&'a str> {
    let mut out: Vec<&str> = Vec::new();
    for k in keys {
        if !out.contains(&k) {
            out.push(k);
        }
    }
    out
}

/// Subject-wise k-fold plan over the train-split records: subjects are
/// shuffled by `seed` and dealt round-robin into `k` folds.
pub fn subject_kfold(records: &[StackRecord], k: usize, seed: u64) -> Result<SplitPlan, EvalError> {
    let scope: Vec<usize> = (0..records.len()).filter(|&i| records[i].split == Split::Train).collect();
    let mut subjects = distinct(scope.iter().map(|&i| records[i].subject_id.as_str()));
    if k < 2 || subjects.len() < k {
        return Err(EvalError::TooFewGroups { needed: k.max(2), found: subjects.len() });
    }
    subjects.shuffle(&mut rng_from_seed(seed));
    let fold_of = |s: &str| subjects.iter().position(|&x| x == s).map(|p| p % k).unwrap_or(0);
    let folds = (0..k)
        .map(|f| {
            let (eval, train): (Vec<usize>, Vec<usize>) = scope.iter().partition(|&&i| fold_of(&records[i].subject_id) == f);
            Fold { label: alloc::format!("fold{f}"), train, eval }
        })
        .collect();
    Ok(SplitPlan { folds, grouping: GroupingKey::Subject, seed })
}

/// Leave-one-scanner-out plan over the train-split records.
pub fn loso_split(records: &[StackRecord]) -> Result<SplitPlan, EvalError> {
    let scope: Vec<usize> = (0..records.len()).filter(|&i| records[i].split == Split::Train).collect();
    let scanners = distinct(scope.iter().map(|&i| records[i].scanner_id.as_str()));
    if scanners.len() < 2 {
        return Err(EvalError::TooFewGroups { needed: 2, found: scanners.len() });
    }
    let folds = scanners
        .iter()
        .map(|&s| {
            let (eval, train): (Vec<usize>, Vec<usize>) = scope.iter().partition(|&&i| records[i].scanner_id == s);
            Fold { label: s.into(), train, eval }
        })
        .collect();
    Ok(SplitPlan { folds, grouping: GroupingKey::Scanner, seed: 0 })
}

/// Train on every train-split record; one evaluation fold per pure-test scanner.
pub fn pure_test_split(records: &[StackRecord]) -> Result<SplitPlan, EvalError> {
    let train: Vec<usize> = (0..records.len()).filter(|&i| records[i].split == Split::Train).collect();
    let test: Vec<usize> = (0..records.len()).filter(|&i| records[i].split == Split::PureTest).collect();
    if test.is_empty() || train.is_empty() {
        return Err(EvalError::ScopeEmpty);
    }
    let scanners = distinct(test.iter().map(|&i| records[i].scanner_id.as_str()));
    let folds = scanners
        .iter()
        .map(|&s| Fold {
            label: s.into(),
            train: train.clone(),
            eval: test.iter().copied().filter(|&i| records[i].scanner_id == s).collect(),
        })
        .collect();
    Ok(SplitPlan { folds, grouping: GroupingKey::Scanner, seed: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;

    fn records(subjects: usize, scanners: usize) -> Vec<StackRecord> {
        (0..subjects * 2)
            .map(|i| {
                let s = i / 2;
                StackRecord::new(&format!("st{i}"), &format!("sub{s}"), &format!("sc{}", s % scanners), "site")
            })
            .collect()
    }

    #[test]
    fn twenty_subjects_ten_folds() {
        let r = records(20, 4);
        let plan = subject_kfold(&r, 10, 7).unwrap();
        assert_eq!(plan.folds.len(), 10);
        for f in &plan.folds {
            assert_eq!(distinct(f.eval.iter().map(|&i| r[i].subject_id.as_str())).len(), 2);
        }
        assert!(plan.is_leak_free(&r));
        assert_eq!(subject_kfold(&records(5, 2), 10, 0), Err(EvalError::TooFewGroups { needed: 10, found: 5 }));
    }

    #[test]
    fn loso_one_fold_per_scanner() {
        let r = records(16, 8);
        let plan = loso_split(&r).unwrap();
        assert_eq!(plan.folds.len(), 8);
        assert_eq!(plan.folds.iter().map(|f| f.eval.len()).sum::<usize>(), r.len());
        assert!(plan.is_leak_free(&r));
        assert!(loso_split(&records(4, 1)).is_err());
        assert_eq!(pure_test_split(&r), Err(EvalError::ScopeEmpty));
    }
}
