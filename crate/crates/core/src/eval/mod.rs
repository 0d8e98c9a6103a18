//! Evaluation protocols, metrics and baselines.

use alloc::string::String;

use thiserror::Error;

use crate::forest::ForestError;

pub mod baselines;
pub mod metrics;
pub mod protocol;
pub mod splits;
pub mod subsample;

pub use baselines::{baseline_niftymic_qc, baseline_subject_oracle, fit_logistic_1d, LogisticFit};
pub use metrics::{agreement_metrics, classification_metrics, cohen_kappa, regression_metrics, roc_auc, Agreement, ClassificationMetrics, RegressionMetrics};
pub use protocol::{run_protocol, Method, MetricName, MetricReport, MetricSummary, Protocol, ProtocolConfig, QualityTask, EXCLUDE_THRESHOLD};
pub use splits::{loso_split, pure_test_split, subject_kfold, Fold, GroupingKey, SplitPlan};
pub use subsample::{subsample_experiment, SubsampleCell, SubsampleConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("need at least {needed} groups, found {found}")]
    TooFewGroups { needed: usize, found: usize },
    #[error("nothing to evaluate in the requested scope")]
    ScopeEmpty,
    #[error("inputs have mismatched lengths")]
    LengthMismatch,
    #[error("fewer than two paired ratings")]
    NoOverlap,
    #[error("a stack in scope has no rating")]
    MissingLabel,
    #[error("feature `{0}` is not in the table")]
    MissingFeature(String),
    #[error("method {method} does not support the {task} task")]
    Unsupported { method: String, task: &'static str },
    #[error(transparent)]
    Forest(#[from] ForestError),
}
