//! Random forests for quality rating (regression) and include/exclude
//! decisions (classification).
//!
//! Each tree is grown on its own bootstrap sample with a seed derived from the
//! master seed, so fitting is reproducible and independent of thread count.

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::rng::{derive_seed, rng_from_seed, stream};

mod ranking;
mod table;
mod tree;

pub use ranking::{correlation_group_rank, FeatureRanking};
pub use table::FeatureTable;
pub use tree::{bootstrap_counts, Node, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    Classification,
    Regression,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Classification => "classification",
            Task::Regression => "regression",
        }
    }

    pub fn parse(s: &str) -> Option<Task> {
        match s {
            "classification" => Some(Task::Classification),
            "regression" => Some(Task::Regression),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ForestError {
    #[error("row {row} has {found} values, expected {expected}")]
    RowLength { row: usize, expected: usize, found: usize },
    #[error("non-finite value in row {row}, column `{column}`")]
    NonFinite { row: usize, column: String },
    #[error("need at least 2 rows with one target each, got {rows} rows and {targets} targets")]
    BadShape { rows: usize, targets: usize },
    #[error("classification labels must be 0 or 1, found {0}")]
    BadLabel(f64),
    #[error("feature `{0}` is not available")]
    FeatureMismatch(String),
    #[error("need at least {needed} features, found {found}")]
    TooFewFeatures { needed: usize, found: usize },
    #[error("number of trees must be positive")]
    NoTrees,
}

/// Conditions that do not prevent fitting but deserve a warning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ForestWarning {
    /// Every training label belongs to the same class; the model is constant.
    DegenerateLabels,
    /// No tree holds a split; importances are all zero.
    NoSplits,
}

impl ForestWarning {
    pub fn name(self) -> &'static str {
        match self {
            ForestWarning::DegenerateLabels => "degenerate_labels",
            ForestWarning::NoSplits => "no_splits",
        }
    }

    pub fn parse(s: &str) -> Option<ForestWarning> {
        match s {
            "degenerate_labels" => Some(ForestWarning::DegenerateLabels),
            "no_splits" => Some(ForestWarning::NoSplits),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestParams {
    pub n_trees: usize,
    pub seed: u64,
    /// Features examined per node; `None` selects √p for classification and
    /// p for regression.
    pub max_features: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self { n_trees: 100, seed: 0, max_features: None }
    }
}

/// A fitted forest.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub task: Task,
    pub feature_names: Vec<String>,
    pub seed: u64,
    pub n_train: usize,
    pub trees: Vec<Tree>,
    /// Per-tree seeds, from which bootstrap samples can be replayed.
    pub tree_seeds: Vec<u64>,
    /// Mean decrease in impurity, normalized to sum to one.
    pub importances: Vec<f64>,
    pub warnings: Vec<ForestWarning>,
}

/// Output of [`ForestModel::predict`].
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// Mean leaf value: class-1 probability or predicted score.
    pub scores: Vec<f64>,
    /// Thresholded labels (`score >= 0.5`), classification only.
    pub labels: Option<Vec<u8>>,
}

fn mtry(task: Task, p: usize, max_features: Option<usize>) -> usize {
    let m = match (max_features, task) {
        (Some(m), _) => m,
        (None, Task::Classification) => crate::num::floor(crate::num::sqrt(p as f64)) as usize,
        (None, Task::Regression) => p,
    };
    m.clamp(1, p.max(1))
}

/// Fits a forest on `x` with targets `y` (labels in {0, 1} for classification).
pub fn fit_forest(x: &FeatureTable, y: &[f64], task: Task, params: &ForestParams) -> Result<ForestModel, ForestError> {
    let n = x.n_rows();
    if n < 2 || y.len() != n {
        return Err(ForestError::BadShape { rows: n, targets: y.len() });
    }
    if params.n_trees == 0 {
        return Err(ForestError::NoTrees);
    }
    if let Some(&bad) = y.iter().find(|v| !v.is_finite() || (task == Task::Classification && **v != 0.0 && **v != 1.0)) {
        return Err(ForestError::BadLabel(bad));
    }
    let p = x.n_features();
    let tree_seeds: Vec<u64> = (0..params.n_trees as u64).map(|i| derive_seed(params.seed, stream::TREE, i)).collect();
    let mut warnings = Vec::new();
    if task == Task::Classification && y.iter().all(|&v| v == y[0]) {
        warnings.push(ForestWarning::DegenerateLabels);
        warnings.push(ForestWarning::NoSplits);
        return Ok(ForestModel {
            task,
            feature_names: x.names().to_vec(),
            seed: params.seed,
            n_train: n,
            trees: tree_seeds.iter().map(|_| Tree::leaf(y[0])).collect(),
            tree_seeds,
            importances: alloc::vec![0.0; p],
            warnings,
        });
    }
    let columns = x.columns();
    let m = mtry(task, p, params.max_features);
    let fit_one = |seed: &u64| {
        let mut rng = rng_from_seed(*seed);
        let counts = bootstrap_counts(&mut rng, n);
        tree::grow(&columns, y, &counts, task, m, &mut rng)
    };
    #[cfg(feature = "std")]
    let fitted: Vec<(Tree, Vec<f64>)> = {
        use rayon::prelude::*;
        tree_seeds.par_iter().map(fit_one).collect()
    };
    #[cfg(not(feature = "std"))]
    let fitted: Vec<(Tree, Vec<f64>)> = tree_seeds.iter().map(fit_one).collect();

    let mut importances = alloc::vec![0.0; p];
    let mut contributing = 0usize;
    for (_, imp) in &fitted {
        let total: f64 = imp.iter().sum();
        if total > 0.0 {
            contributing += 1;
            for (a, b) in importances.iter_mut().zip(imp) {
                *a += b / total;
            }
        }
    }
    let sum: f64 = importances.iter().sum();
    if contributing == 0 || sum <= 0.0 {
        warnings.push(ForestWarning::NoSplits);
        importances.iter_mut().for_each(|v| *v = 0.0);
    } else {
        importances.iter_mut().for_each(|v| *v /= sum);
    }
    Ok(ForestModel {
        task,
        feature_names: x.names().to_vec(),
        seed: params.seed,
        n_train: n,
        trees: fitted.into_iter().map(|(t, _)| t).collect(),
        tree_seeds,
        importances,
        warnings,
    })
}

impl ForestModel {
    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    /// Mean leaf value over trees for one row in model column order.
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }

    /// Predicts rows whose columns are aligned by name with the training
    /// features (extra columns are ignored, order is free).
    pub fn predict(&self, x: &FeatureTable) -> Result<Prediction, ForestError> {
        let aligned = if x.names() == self.feature_names.as_slice() { None } else { Some(x.select_columns(&self.feature_names)?) };
        let table = aligned.as_ref().unwrap_or(x);
        let scores: Vec<f64> = table.rows().iter().map(|r| self.predict_row(r)).collect();
        let labels = (self.task == Task::Classification).then(|| scores.iter().map(|&s| u8::from(s >= 0.5)).collect());
        Ok(Prediction { scores, labels })
    }

    /// Normalized impurity importances with their feature names.
    pub fn feature_importance(&self) -> Vec<(&str, f64)> {
        self.feature_names.iter().map(String::as_str).zip(self.importances.iter().copied()).collect()
    }

    /// Rows left out of tree `t`'s bootstrap sample.
    pub fn out_of_bag(&self, t: usize) -> Vec<bool> {
        let mut rng = rng_from_seed(self.tree_seeds[t]);
        bootstrap_counts(&mut rng, self.n_train).into_iter().map(|c| c == 0).collect()
    }

    pub fn has_warning(&self, w: ForestWarning) -> bool {
        self.warnings.contains(&w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;

    fn names(p: usize) -> Vec<String> {
        (0..p).map(|j| format!("f{j}")).collect()
    }

    #[test]
    fn separable_data_is_fit_exactly() {
        let rows: Vec<Vec<f64>> = (0..200).map(|i| alloc::vec![(i % 20) as f64, (i / 20) as f64]).collect();
        let y: Vec<f64> = rows.iter().map(|r| f64::from(u8::from(r[0] + r[1] > 12.0))).collect();
        let x = FeatureTable::new(names(2), rows).unwrap();
        let m = fit_forest(&x, &y, Task::Classification, &ForestParams { seed: 3, ..Default::default() }).unwrap();
        let labels = m.predict(&x).unwrap().labels.unwrap();
        assert!(labels.iter().zip(&y).all(|(&l, &t)| f64::from(l) == t));
    }

    #[test]
    fn constant_regression_target() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| alloc::vec![i as f64, (i * i) as f64]).collect();
        let x = FeatureTable::new(names(2), rows).unwrap();
        let m = fit_forest(&x, &[2.5; 30], Task::Regression, &ForestParams::default()).unwrap();
        assert!(m.predict(&x).unwrap().scores.iter().all(|&s| s == 2.5));
        assert!(m.has_warning(ForestWarning::NoSplits));
        assert!(m.importances.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_class_is_degenerate() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| alloc::vec![i as f64]).collect();
        let x = FeatureTable::new(names(1), rows).unwrap();
        let m = fit_forest(&x, &[1.0; 10], Task::Classification, &ForestParams::default()).unwrap();
        assert!(m.has_warning(ForestWarning::DegenerateLabels));
        assert_eq!(m.predict(&x).unwrap().labels.unwrap(), alloc::vec![1; 10]);
    }

    #[test]
    fn rejects_bad_labels() {
        let x = FeatureTable::new(names(1), alloc::vec![alloc::vec![0.0], alloc::vec![1.0]]).unwrap();
        assert_eq!(fit_forest(&x, &[0.0, 2.0], Task::Classification, &ForestParams::default()), Err(ForestError::BadLabel(2.0)));
    }
}
