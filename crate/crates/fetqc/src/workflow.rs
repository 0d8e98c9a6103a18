//! Training, evaluation and feature selection over labelled IQM tables, and
//! the TSV layouts of their results.

use std::collections::HashMap;

use fetqc_core::eval::{
    run_protocol, subsample_experiment, EvalError, Method, MetricName, MetricReport, Protocol, ProtocolConfig, QualityTask, SubsampleCell,
    SubsampleConfig,
};
use fetqc_core::forest::{correlation_group_rank, fit_forest, FeatureRanking, FeatureTable, ForestError, ForestModel, ForestParams};
use fetqc_core::{Split, StackRecord};
use thiserror::Error;

use crate::tables::{format_sig9, IqmTable};

/// Column holding the brain-mask volume, used by the volume-rule baseline.
pub const VOLUME_FEATURE: &str = "mask_volume";
/// Prefix of the deep-learning IQMs left out of reduced models by default.
pub const DL_PREFIX: &str = "dl_";
/// Suffix of failure-flag columns.
pub const FLAG_SUFFIX: &str = "_nan";

#[derive(Debug, Error)]
pub enum WorkflowError {
    #[error("{0}")]
    Alignment(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Forest(#[from] ForestError),
}

/// IQM rows joined with their ratings.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledTable {
    pub records: Vec<StackRecord>,
    pub table: FeatureTable,
    pub ratings: Vec<f64>,
}

impl LabeledTable {
    /// Rows whose split is `split`.
    pub fn split(&self, split: Split) -> LabeledTable {
        let idx: Vec<usize> = (0..self.records.len()).filter(|&i| self.records[i].split == split).collect();
        LabeledTable {
            records: idx.iter().map(|&i| self.records[i].clone()).collect(),
            table: self.table.select_rows(&idx),
            ratings: idx.iter().map(|&i| self.ratings[i]).collect(),
        }
    }
}

/// Keeps the IQM rows that have a rating, in table order. A rating without
/// an IQM row is an error.
pub fn join_labels(iqms: &IqmTable, labels: &[(String, f64)]) -> Result<LabeledTable, WorkflowError> {
    let by_id: HashMap<&str, f64> = labels.iter().map(|(s, r)| (s.as_str(), *r)).collect();
    let present: std::collections::HashSet<&str> = iqms.records.iter().map(|r| r.stack_id.as_str()).collect();
    if let Some((s, _)) = labels.iter().find(|(s, _)| !present.contains(s.as_str())) {
        return Err(WorkflowError::Alignment(format!("rated stack `{s}` has no IQM row")));
    }
    let idx: Vec<usize> = (0..iqms.records.len()).filter(|&i| by_id.contains_key(iqms.records[i].stack_id.as_str())).collect();
    if idx.is_empty() {
        return Err(WorkflowError::Alignment("no IQM row has a rating".into()));
    }
    Ok(LabeledTable {
        records: idx.iter().map(|&i| iqms.records[i].clone()).collect(),
        table: iqms.table.select_rows(&idx),
        ratings: idx.iter().map(|&i| by_id[iqms.records[i].stack_id.as_str()]).collect(),
    })
}

/// Target vector of a task: ratings, or 1 for include / 0 for exclude.
pub fn targets(ratings: &[f64], task: QualityTask, exclude_threshold: f64) -> Vec<f64> {
    match task {
        QualityTask::Qa => ratings.to_vec(),
        QualityTask::Qc => ratings.iter().map(|&r| f64::from(u8::from(r >= exclude_threshold))).collect(),
    }
}

/// Fits a forest on the train-split rows, optionally on a feature subset.
pub fn train_model(
    data: &LabeledTable,
    task: QualityTask,
    params: &ForestParams,
    features: Option<&[String]>,
    exclude_threshold: f64,
) -> Result<ForestModel, WorkflowError> {
    let train = data.split(Split::Train);
    if train.records.is_empty() {
        return Err(WorkflowError::Alignment("no train-split rows".into()));
    }
    let x = match features {
        Some(f) => train.table.select_columns(f)?,
        None => train.table.clone(),
    };
    Ok(fit_forest(&x, &targets(&train.ratings, task, exclude_threshold), task.forest_task(), params)?)
}

/// The baseline each task is compared against.
pub fn baseline_method(task: QualityTask) -> Method {
    match task {
        QualityTask::Qc => Method::NiftyMicQc { volume_feature: VOLUME_FEATURE.into() },
        QualityTask::Qa => Method::SubjectOracle,
    }
}

/// Evaluation settings shared by every method of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSettings {
    pub protocol: Protocol,
    pub task: QualityTask,
    pub repetitions: usize,
    pub seed: u64,
    pub forest: ForestParams,
    pub exclude_threshold: f64,
}

impl EvalSettings {
    pub fn config(&self, method: Method) -> ProtocolConfig {
        ProtocolConfig {
            protocol: self.protocol,
            task: self.task,
            method,
            repetitions: self.repetitions,
            seed: self.seed,
            forest: self.forest,
            exclude_threshold: self.exclude_threshold,
        }
    }
}

/// Baseline, full forest and, when given, the reduced forest.
pub fn evaluate(data: &LabeledTable, s: &EvalSettings, reduced: Option<&[String]>) -> Result<Vec<MetricReport>, WorkflowError> {
    let mut methods = vec![baseline_method(s.task), Method::Forest { features: None }];
    if let Some(f) = reduced {
        methods.push(Method::Forest { features: Some(f.to_vec()) });
    }
    methods
        .into_iter()
        .map(|m| Ok(run_protocol(&data.records, &data.table, &data.ratings, &s.config(m))?))
        .collect()
}

fn cell(median: Option<f64>, worst: Option<f64>) -> String {
    let f = |v: Option<f64>| v.map_or_else(|| "--".to_string(), |x| format!("{x:.2}"));
    format!("{} ({})", f(median), f(worst))
}

/// One row per method; cells read `median (mean worst fold)`.
pub fn table2_tsv(reports: &[MetricReport]) -> String {
    let Some(first) = reports.first() else { return String::new() };
    let metrics = MetricName::for_task(first.task);
    let mut s = String::from("protocol\ttask\tmethod");
    for m in metrics {
        s += &format!("\t{}", m.name());
    }
    s.push('\n');
    for r in reports {
        s += &format!("{}\t{}\t{}", r.protocol.name(), r.task.name(), r.method);
        for &m in metrics {
            let sm = r.summary_of(m);
            s += &format!("\t{}", cell(sm.and_then(|x| x.median), sm.and_then(|x| x.worst)));
        }
        s.push('\n');
    }
    s
}

/// Pooled metrics per scanner for every method.
pub fn per_scanner_tsv(reports: &[MetricReport]) -> String {
    let Some(first) = reports.first() else { return String::new() };
    let metrics = MetricName::for_task(first.task);
    let mut s = String::from("method\tscanner_id");
    for m in metrics {
        s += &format!("\t{}", m.name());
    }
    s.push('\n');
    for r in reports {
        for (scanner, vals) in &r.per_scanner {
            s += &format!("{}\t{}", r.method, scanner);
            for m in metrics {
                let v = vals.iter().find(|(n, _)| n == m).and_then(|(_, v)| *v);
                s += &format!("\t{}", v.map_or_else(|| "NA".to_string(), format_sig9));
            }
            s.push('\n');
        }
    }
    s
}

/// Per-fold metric values of every method.
pub fn folds_tsv(reports: &[MetricReport]) -> String {
    let Some(first) = reports.first() else { return String::new() };
    let metrics = MetricName::for_task(first.task);
    let mut s = String::from("method\trepetition\tfold\tn_train\tn_eval");
    for m in metrics {
        s += &format!("\t{}", m.name());
    }
    s.push('\n');
    for r in reports {
        for f in &r.folds {
            s += &format!("{}\t{}\t{}\t{}\t{}", r.method, f.repetition, f.fold, f.n_train, f.n_eval);
            for m in metrics {
                let v = f.metrics.iter().find(|(n, _)| n == m).and_then(|(_, v)| *v);
                s += &format!("\t{}", v.map_or_else(|| "NA".to_string(), format_sig9));
            }
            s.push('\n');
        }
    }
    s
}

/// Feature-selection settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectSettings {
    pub k: usize,
    pub threshold: f64,
    pub exclude_dl: bool,
    pub seed: u64,
    pub forest: ForestParams,
    pub exclude_threshold: f64,
}

impl Default for SelectSettings {
    fn default() -> Self {
        Self { k: 20, threshold: 0.95, exclude_dl: true, seed: 0, forest: ForestParams::default(), exclude_threshold: 1.0 }
    }
}

/// Names never offered as reduced-model features: flag columns and, when
/// requested, deep-learning IQMs.
pub fn excluded_features(names: &[String], exclude_dl: bool) -> Vec<String> {
    names.iter().filter(|n| n.ends_with(FLAG_SUFFIX) || (exclude_dl && n.starts_with(DL_PREFIX))).cloned().collect()
}

/// Ranks features by QC and QA importance averaged over the models of one
/// LoSo pass on the train split, grouping on train-split correlations.
pub fn select_features(data: &LabeledTable, s: &SelectSettings) -> Result<FeatureRanking, WorkflowError> {
    let train = data.split(Split::Train);
    let importance = |task| -> Result<Vec<f64>, WorkflowError> {
        let cfg = ProtocolConfig {
            protocol: Protocol::Loso,
            task,
            method: Method::Forest { features: None },
            repetitions: 1,
            seed: s.seed,
            forest: s.forest,
            exclude_threshold: s.exclude_threshold,
        };
        let report = run_protocol(&train.records, &train.table, &train.ratings, &cfg)?;
        let by_name: HashMap<String, f64> = report.importances.unwrap_or_default().into_iter().collect();
        Ok(train.table.names().iter().map(|n| by_name.get(n).copied().unwrap_or(0.0)).collect())
    };
    let qc = importance(QualityTask::Qc)?;
    let qa = importance(QualityTask::Qa)?;
    let excluded = excluded_features(train.table.names(), s.exclude_dl);
    let ex: Vec<&str> = excluded.iter().map(String::as_str).collect();
    Ok(correlation_group_rank(&train.table, &qc, &qa, s.threshold, s.k, &ex, s.seed)?)
}

/// Runs the scanner-count × training-size grid on the train split.
pub fn subsample(data: &LabeledTable, cfg: &SubsampleConfig) -> Result<Vec<SubsampleCell>, WorkflowError> {
    let train = data.split(Split::Train);
    Ok(subsample_experiment(&train.records, &train.table, &train.ratings, cfg)?)
}

/// One row per grid cell.
pub fn subsample_tsv(cells: &[SubsampleCell]) -> String {
    let f = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), format_sig9);
    let mut s = String::from("n_scanners\tn_train\tskipped\trepetitions\tmin\tmedian\tmax\tmad\n");
    for c in cells {
        s += &format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            c.n_scanners,
            c.n_train,
            u8::from(c.skipped),
            c.repetitions.len(),
            f(c.min),
            f(c.median),
            f(c.max),
            f(c.mad)
        );
    }
    s
}

/// Selected names followed by the grouping, as a TSV.
pub fn ranking_tsv(r: &FeatureRanking) -> String {
    let mut s = String::from("rank\trepresentative\tscore\tselected\tgroup\n");
    for (i, (rep, (score, group))) in r.representatives.iter().zip(r.scores.iter().zip(&r.groups)).enumerate() {
        let sel = r.selected.contains(rep);
        s += &format!("{}\t{}\t{}\t{}\t{}\n", i + 1, rep, format_sig9(*score), u8::from(sel), group.join(","));
    }
    s
}
