//! Repeated cross-validation protocols producing fold-level reports.

use alloc::string::String;
use alloc::vec::Vec;

use super::baselines::{baseline_subject_oracle, fit_logistic_1d, niftymic_volume_ratio, NIFTYMIC_VOLUME_FRACTION};
use super::metrics::{classification_metrics, regression_metrics};
use super::splits::{loso_split, pure_test_split, subject_kfold, SplitPlan};
use super::EvalError;
use crate::forest::{fit_forest, FeatureTable, ForestParams, Task};
use crate::record::StackRecord;
use crate::rng::{derive_seed, stream};
use crate::stats;

/// Ratings below this value mean exclusion.
pub const EXCLUDE_THRESHOLD: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    SubjectCv { k: usize },
    Loso,
    PureTest,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::SubjectCv { .. } => "subject-cv",
            Protocol::Loso => "loso",
            Protocol::PureTest => "pure-test",
        }
    }
}

/// QC predicts include/exclude; QA predicts the rating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QualityTask {
    Qc,
    Qa,
}

impl QualityTask {
    pub fn name(self) -> &'static str {
        match self {
            QualityTask::Qc => "qc",
            QualityTask::Qa => "qa",
        }
    }

    pub fn forest_task(self) -> Task {
        match self {
            QualityTask::Qc => Task::Classification,
            QualityTask::Qa => Task::Regression,
        }
    }
}

/// What produces the predictions in each fold.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    /// Random forest on all columns, or on the listed ones.
    Forest { features: Option<Vec<String>> },
    /// Subject-median brain volume rule on the named column (QC only).
    NiftyMicQc { volume_feature: String },
    /// Subject-mean of the true ratings.
    SubjectOracle,
    /// Logistic threshold learned on one column (QC only).
    Logistic { feature: String },
}

impl Method {
    pub fn name(&self) -> String {
        match self {
            Method::Forest { features: None } => "forest".into(),
            Method::Forest { features: Some(f) } => alloc::format!("forest-{}", f.len()),
            Method::NiftyMicQc { .. } => "niftymic-qc".into(),
            Method::SubjectOracle => "subject-oracle".into(),
            Method::Logistic { feature } => alloc::format!("logistic-{feature}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    pub protocol: Protocol,
    pub task: QualityTask,
    pub method: Method,
    pub repetitions: usize,
    pub seed: u64,
    pub forest: ForestParams,
    pub exclude_threshold: f64,
}

impl ProtocolConfig {
    pub fn new(protocol: Protocol, task: QualityTask, method: Method) -> Self {
        Self { protocol, task, method, repetitions: 5, seed: 0, forest: ForestParams::default(), exclude_threshold: EXCLUDE_THRESHOLD }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetricName {
    WeightedF1,
    Auc,
    Precision,
    Recall,
    R2,
    Spearman,
    Mae,
}

impl MetricName {
    pub const QC: [MetricName; 4] = [MetricName::WeightedF1, MetricName::Auc, MetricName::Precision, MetricName::Recall];
    pub const QA: [MetricName; 3] = [MetricName::R2, MetricName::Spearman, MetricName::Mae];

    pub fn name(self) -> &'static str {
        match self {
            MetricName::WeightedF1 => "F1",
            MetricName::Auc => "AUC",
            MetricName::Precision => "precision",
            MetricName::Recall => "recall",
            MetricName::R2 => "R2",
            MetricName::Spearman => "spearman",
            MetricName::Mae => "MAE",
        }
    }

    pub fn higher_is_better(self) -> bool {
        self != MetricName::Mae
    }

    pub fn for_task(task: QualityTask) -> &'static [MetricName] {
        match task {
            QualityTask::Qc => &Self::QC,
            QualityTask::Qa => &Self::QA,
        }
    }
}

/// Metric values of one evaluation group; `None` marks an undefined value.
pub type MetricValues = Vec<(MetricName, Option<f64>)>;

#[derive(Debug, Clone, PartialEq)]
pub struct FoldEntry {
    pub repetition: usize,
    pub fold: String,
    pub n_train: usize,
    pub n_eval: usize,
    pub metrics: MetricValues,
}

/// Median across folds and worst fold, each averaged over repetitions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSummary {
    pub metric: MetricName,
    pub median: Option<f64>,
    pub worst: Option<f64>,
    /// Fold entries where the metric was undefined.
    pub undefined: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub protocol: Protocol,
    pub task: QualityTask,
    pub method: String,
    pub repetition_seeds: Vec<u64>,
    pub folds: Vec<FoldEntry>,
    pub summary: Vec<MetricSummary>,
    /// Metrics of pooled out-of-fold predictions per scanner, averaged over
    /// repetitions.
    pub per_scanner: Vec<(String, MetricValues)>,
    /// Forest importances averaged over every fold model, by feature name.
    pub importances: Option<Vec<(String, f64)>>,
}

impl MetricReport {
    pub fn summary_of(&self, m: MetricName) -> Option<&MetricSummary> {
        self.summary.iter().find(|s| s.metric == m)
    }

    pub fn median(&self, m: MetricName) -> Option<f64> {
        self.summary_of(m).and_then(|s| s.median)
    }

    pub fn worst(&self, m: MetricName) -> Option<f64> {
        self.summary_of(m).and_then(|s| s.worst)
    }
}

/// Predictions of one fold: scores for the evaluation rows and the threshold
/// that turns scores into include labels.
pub(crate) struct FoldPrediction {
    pub scores: Vec<f64>,
    pub threshold: f64,
    pub importances: Option<Vec<f64>>,
}

pub(crate) struct Dataset<'a> {
    pub records: &'a [StackRecord],
    pub table: &'a FeatureTable,
    pub ratings: &'a [f64],
}

fn column(table: &FeatureTable, name: &str) -> Result<Vec<f64>, EvalError> {
    let j = table.position(name).ok_or_else(|| EvalError::MissingFeature(name.into()))?;
    Ok(table.column(j))
}

pub(crate) fn predict_fold(
    data: &Dataset<'_>,
    cfg: &ProtocolConfig,
    features: Option<&FeatureTable>,
    train: &[usize],
    eval: &[usize],
    seed: u64,
) -> Result<FoldPrediction, EvalError> {
    let thr = cfg.exclude_threshold;
    let label = |i: usize| f64::from(u8::from(data.ratings[i] >= thr));
    match (&cfg.method, cfg.task) {
        (Method::Forest { .. }, task) => {
            let table = features.unwrap_or(data.table);
            let x_train = table.select_rows(train);
            let y: Vec<f64> = match task {
                QualityTask::Qc => train.iter().map(|&i| label(i)).collect(),
                QualityTask::Qa => train.iter().map(|&i| data.ratings[i]).collect(),
            };
            let params = ForestParams { seed, ..cfg.forest };
            let model = fit_forest(&x_train, &y, task.forest_task(), &params)?;
            let scores = model.predict(&table.select_rows(eval))?.scores;
            Ok(FoldPrediction { scores, threshold: 0.5, importances: Some(model.importances) })
        }
        (Method::NiftyMicQc { volume_feature }, QualityTask::Qc) => {
            let vols = column(data.table, volume_feature)?;
            let subjects: Vec<&str> = eval.iter().map(|&i| data.records[i].subject_id.as_str()).collect();
            let v: Vec<f64> = eval.iter().map(|&i| vols[i]).collect();
            Ok(FoldPrediction { scores: niftymic_volume_ratio(&subjects, &v), threshold: NIFTYMIC_VOLUME_FRACTION, importances: None })
        }
        (Method::SubjectOracle, _) => {
            let subjects: Vec<&str> = eval.iter().map(|&i| data.records[i].subject_id.as_str()).collect();
            let r: Vec<f64> = eval.iter().map(|&i| data.ratings[i]).collect();
            Ok(FoldPrediction { scores: baseline_subject_oracle(&subjects, &r), threshold: thr, importances: None })
        }
        (Method::Logistic { feature }, QualityTask::Qc) => {
            let col = column(data.table, feature)?;
            let xs: Vec<f64> = train.iter().map(|&i| col[i]).collect();
            let (m, s) = (stats::mean(&xs), stats::std_dev(&xs));
            let z = |v: f64| if s > 0.0 { (v - m) / s } else { v - m };
            let zs: Vec<f64> = xs.iter().map(|&v| z(v)).collect();
            let ys: Vec<u8> = train.iter().map(|&i| label(i) as u8).collect();
            let fit = fit_logistic_1d(&zs, &ys);
            let scores = eval.iter().map(|&i| fit.probability(z(col[i]))).collect();
            Ok(FoldPrediction { scores, threshold: 0.5, importances: None })
        }
        (m, t) => Err(EvalError::Unsupported { method: m.name(), task: t.name() }),
    }
}

pub(crate) fn score_group(data: &Dataset<'_>, task: QualityTask, exclude_threshold: f64, idx: &[usize], pred: &[f64], threshold: f64) -> MetricValues {
    match task {
        QualityTask::Qc => {
            let y: Vec<u8> = idx.iter().map(|&i| u8::from(data.ratings[i] >= exclude_threshold)).collect();
            match classification_metrics(&y, pred, threshold) {
                Ok(m) => alloc::vec![
                    (MetricName::WeightedF1, Some(m.weighted_f1)),
                    (MetricName::Auc, m.auc),
                    (MetricName::Precision, Some(m.precision)),
                    (MetricName::Recall, Some(m.recall)),
                ],
                Err(_) => MetricName::QC.iter().map(|&n| (n, None)).collect(),
            }
        }
        QualityTask::Qa => {
            let y: Vec<f64> = idx.iter().map(|&i| data.ratings[i]).collect();
            match regression_metrics(&y, pred) {
                Ok(m) => alloc::vec![(MetricName::R2, m.r2), (MetricName::Spearman, m.spearman), (MetricName::Mae, Some(m.mae))],
                Err(_) => MetricName::QA.iter().map(|&n| (n, None)).collect(),
            }
        }
    }
}

fn plan_for(records: &[StackRecord], protocol: Protocol, seed: u64) -> Result<SplitPlan, EvalError> {
    match protocol {
        Protocol::SubjectCv { k } => subject_kfold(records, k, seed),
        Protocol::Loso => loso_split(records),
        Protocol::PureTest => pure_test_split(records),
    }
}

fn value_of(m: &MetricValues, name: MetricName) -> Option<f64> {
    m.iter().find(|(n, _)| *n == name).and_then(|(_, v)| *v)
}

/// Median and worst of a metric across the folds of one repetition.
pub(crate) fn fold_aggregate(values: &[f64], metric: MetricName) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let worst = if metric.higher_is_better() {
        values.iter().copied().fold(f64::INFINITY, f64::min)
    } else {
        values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    };
    Some((stats::median(values), worst))
}

fn mean_defined(v: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let d: Vec<f64> = v.flatten().collect();
    (!d.is_empty()).then(|| stats::mean(&d))
}

fn check_inputs(records: &[StackRecord], table: &FeatureTable, ratings: &[f64]) -> Result<(), EvalError> {
    if table.n_rows() != records.len() || ratings.len() != records.len() {
        return Err(EvalError::LengthMismatch);
    }
    if ratings.iter().any(|r| !r.is_finite()) {
        return Err(EvalError::MissingLabel);
    }
    Ok(())
}

/// Runs a protocol: for each repetition, build the plan, fit on the train side
/// of every fold and score the evaluation side.
pub fn run_protocol(records: &[StackRecord], table: &FeatureTable, ratings: &[f64], cfg: &ProtocolConfig) -> Result<MetricReport, EvalError> {
    check_inputs(records, table, ratings)?;
    if cfg.repetitions == 0 {
        return Err(EvalError::ScopeEmpty);
    }
    let data = Dataset { records, table, ratings };
    let reduced = match &cfg.method {
        Method::Forest { features: Some(f) } => Some(table.select_columns(f)?),
        _ => None,
    };
    let seeds: Vec<u64> = (0..cfg.repetitions as u64).map(|r| derive_seed(cfg.seed, stream::REPETITION, r)).collect();
    let plans: Vec<SplitPlan> =
        seeds.iter().map(|&s| plan_for(records, cfg.protocol, derive_seed(s, stream::SPLIT, 0))).collect::<Result<_, _>>()?;
    let jobs: Vec<(usize, usize)> = plans.iter().enumerate().flat_map(|(r, p)| (0..p.folds.len()).map(move |f| (r, f))).collect();
    let run = |&(r, f): &(usize, usize)| {
        let fold = &plans[r].folds[f];
        let seed = derive_seed(seeds[r], stream::TREE, f as u64);
        predict_fold(&data, cfg, reduced.as_ref(), &fold.train, &fold.eval, seed)
    };
    #[cfg(feature = "std")]
    let preds: Vec<Result<FoldPrediction, EvalError>> = {
        use rayon::prelude::*;
        jobs.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "std"))]
    let preds: Vec<Result<FoldPrediction, EvalError>> = jobs.iter().map(run).collect();

    let names = MetricName::for_task(cfg.task);
    let mut folds = Vec::with_capacity(jobs.len());
    let mut imp_sum: Option<Vec<f64>> = None;
    let mut imp_n = 0usize;
    let mut pooled: Vec<Vec<(usize, f64, f64)>> = alloc::vec![Vec::new(); cfg.repetitions];
    for (&(r, f), pred) in jobs.iter().zip(preds) {
        let pred = pred?;
        let fold = &plans[r].folds[f];
        let metrics = score_group(&data, cfg.task, cfg.exclude_threshold, &fold.eval, &pred.scores, pred.threshold);
        if let Some(imp) = pred.importances {
            let acc = imp_sum.get_or_insert_with(|| alloc::vec![0.0; imp.len()]);
            acc.iter_mut().zip(&imp).for_each(|(a, b)| *a += b);
            imp_n += 1;
        }
        pooled[r].extend(fold.eval.iter().zip(&pred.scores).map(|(&i, &s)| (i, s, pred.threshold)));
        folds.push(FoldEntry { repetition: r, fold: fold.label.clone(), n_train: fold.train.len(), n_eval: fold.eval.len(), metrics });
    }
    let summary = names
        .iter()
        .map(|&m| {
            let per_rep: Vec<Option<(f64, f64)>> = (0..cfg.repetitions)
                .map(|r| {
                    let v: Vec<f64> = folds.iter().filter(|e| e.repetition == r).filter_map(|e| value_of(&e.metrics, m)).collect();
                    fold_aggregate(&v, m)
                })
                .collect();
            MetricSummary {
                metric: m,
                median: mean_defined(per_rep.iter().map(|x| x.map(|p| p.0))),
                worst: mean_defined(per_rep.iter().map(|x| x.map(|p| p.1))),
                undefined: folds.iter().filter(|e| value_of(&e.metrics, m).is_none()).count(),
            }
        })
        .collect();
    let scanners = super::splits::distinct(pooled.iter().flatten().map(|&(i, _, _)| records[i].scanner_id.as_str()));
    let per_scanner = scanners
        .iter()
        .map(|&sc| {
            let per_rep: Vec<MetricValues> = pooled
                .iter()
                .map(|p| {
                    let rows: Vec<&(usize, f64, f64)> = p.iter().filter(|(i, _, _)| records[*i].scanner_id == sc).collect();
                    let idx: Vec<usize> = rows.iter().map(|r| r.0).collect();
                    let s: Vec<f64> = rows.iter().map(|r| r.1).collect();
                    let thr = rows.first().map_or(0.5, |r| r.2);
                    score_group(&data, cfg.task, cfg.exclude_threshold, &idx, &s, thr)
                })
                .collect();
            let vals = names.iter().map(|&m| (m, mean_defined(per_rep.iter().map(|v| value_of(v, m))))).collect();
            (String::from(sc), vals)
        })
        .collect();
    let feature_names = reduced.as_ref().unwrap_or(table).names().to_vec();
    let importances = imp_sum.map(|s| feature_names.into_iter().zip(s.into_iter().map(|v| v / imp_n as f64)).collect());
    Ok(MetricReport {
        protocol: cfg.protocol,
        task: cfg.task,
        method: cfg.method.name(),
        repetition_seeds: seeds,
        folds,
        summary,
        per_scanner,
        importances,
    })
}
