//! Scanner-count × training-size subsampling experiment.

use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::protocol::{predict_fold, score_group, Dataset, Method, MetricName, ProtocolConfig, Protocol, QualityTask, EXCLUDE_THRESHOLD};
use super::splits::distinct;
use super::EvalError;
use crate::forest::{FeatureTable, ForestParams};
use crate::record::{Split, StackRecord};
use crate::rng::{derive_seed, mix64, rng_from_seed, stream};
use crate::stats;

#[derive(Debug, Clone, PartialEq)]
pub struct SubsampleConfig {
    pub n_scanners: Vec<usize>,
    pub n_train: Vec<usize>,
    pub repetitions: usize,
    pub seed: u64,
    pub task: QualityTask,
    pub metric: MetricName,
    pub forest: ForestParams,
    pub exclude_threshold: f64,
}

impl Default for SubsampleConfig {
    fn default() -> Self {
        Self {
            n_scanners: (1..=7).collect(),
            n_train: (1..=9).map(|i| i * 100).collect(),
            repetitions: 20,
            seed: 0,
            task: QualityTask::Qc,
            metric: MetricName::WeightedF1,
            forest: ForestParams::default(),
            exclude_threshold: EXCLUDE_THRESHOLD,
        }
    }
}

/// Worst, median and best held-out scanner of one repetition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepetitionSpread {
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsampleCell {
    pub n_scanners: usize,
    pub n_train: usize,
    /// Set when some held-out scanner lacks enough stacks in the others.
    pub skipped: bool,
    pub repetitions: Vec<RepetitionSpread>,
    /// Averages over repetitions.
    pub min: Option<f64>,
    pub median: Option<f64>,
    pub max: Option<f64>,
    /// Median absolute deviation of the per-repetition medians.
    pub mad: Option<f64>,
}

fn skipped(n_scanners: usize, n_train: usize) -> SubsampleCell {
    SubsampleCell { n_scanners, n_train, skipped: true, repetitions: Vec::new(), min: None, median: None, max: None, mad: None }
}

/// For every cell and repetition, each train-split scanner is held out in
/// turn; `n_scanners` of the remaining scanners are drawn, then `n_train`
/// stacks from them, a forest is fitted and scored on the held-out scanner.
pub fn subsample_experiment(records: &[StackRecord], table: &FeatureTable, ratings: &[f64], cfg: &SubsampleConfig) -> Result<Vec<SubsampleCell>, EvalError> {
    if table.n_rows() != records.len() || ratings.len() != records.len() {
        return Err(EvalError::LengthMismatch);
    }
    let scope: Vec<usize> = (0..records.len()).filter(|&i| records[i].split == Split::Train).collect();
    let scanners = distinct(scope.iter().map(|&i| records[i].scanner_id.as_str()));
    if scanners.len() < 2 {
        return Err(EvalError::TooFewGroups { needed: 2, found: scanners.len() });
    }
    let by_scanner: Vec<Vec<usize>> =
        scanners.iter().map(|&s| scope.iter().copied().filter(|&i| records[i].scanner_id == s).collect()).collect();
    let data = Dataset { records, table, ratings };
    let pcfg = ProtocolConfig {
        protocol: Protocol::Loso,
        task: cfg.task,
        method: Method::Forest { features: None },
        repetitions: 1,
        seed: cfg.seed,
        forest: cfg.forest,
        exclude_threshold: cfg.exclude_threshold,
    };
    let mut cells = Vec::new();
    for (ci, (&ns, &nt)) in cfg.n_scanners.iter().flat_map(|s| cfg.n_train.iter().map(move |t| (s, t))).enumerate() {
        let feasible = ns >= 1
            && ns < scanners.len()
            && (0..scanners.len()).all(|h| {
                let mut sizes: Vec<usize> = (0..scanners.len()).filter(|&o| o != h).map(|o| by_scanner[o].len()).collect();
                sizes.sort_unstable_by(|a, b| b.cmp(a));
                sizes.iter().take(ns).sum::<usize>() >= nt
            });
        if !feasible {
            cells.push(skipped(ns, nt));
            continue;
        }
        let jobs: Vec<(usize, usize)> = (0..cfg.repetitions).flat_map(|r| (0..scanners.len()).map(move |h| (r, h))).collect();
        let run = |&(r, h): &(usize, usize)| -> Result<Option<f64>, EvalError> {
            let seed = derive_seed(cfg.seed, stream::SUBSAMPLE, mix64(ci as u64) ^ mix64((r * 1_000 + h) as u64));
            let mut rng = rng_from_seed(seed);
            // Draw scanners until the pool can hold n_train stacks.
            let mut others: Vec<usize> = (0..scanners.len()).filter(|&o| o != h).collect();
            others.shuffle(&mut rng);
            let mut chosen: Vec<usize> = others.iter().copied().take(ns).collect();
            if chosen.iter().map(|&o| by_scanner[o].len()).sum::<usize>() < nt {
                others.sort_by_key(|&o| core::cmp::Reverse(by_scanner[o].len()));
                chosen = others.into_iter().take(ns).collect();
            }
            let mut pool: Vec<usize> = chosen.iter().flat_map(|&o| by_scanner[o].iter().copied()).collect();
            pool.shuffle(&mut rng);
            pool.truncate(nt);
            pool.sort_unstable();
            let pred = predict_fold(&data, &pcfg, None, &pool, &by_scanner[h], derive_seed(seed, stream::TREE, 0))?;
            let m = score_group(&data, cfg.task, cfg.exclude_threshold, &by_scanner[h], &pred.scores, pred.threshold);
            Ok(m.iter().find(|(n, _)| *n == cfg.metric).and_then(|(_, v)| *v))
        };
        #[cfg(feature = "std")]
        let values: Vec<Result<Option<f64>, EvalError>> = {
            use rayon::prelude::*;
            jobs.par_iter().map(run).collect()
        };
        #[cfg(not(feature = "std"))]
        let values: Vec<Result<Option<f64>, EvalError>> = jobs.iter().map(run).collect();
        let values: Vec<Option<f64>> = values.into_iter().collect::<Result<_, _>>()?;
        let mut reps = Vec::new();
        for r in 0..cfg.repetitions {
            let v: Vec<f64> = jobs.iter().zip(&values).filter(|((jr, _), _)| *jr == r).filter_map(|(_, v)| *v).collect();
            if v.is_empty() {
                continue;
            }
            let s = stats::sorted(&v);
            reps.push(RepetitionSpread { min: s[0], median: stats::percentile_sorted(&s, 50.0), max: s[s.len() - 1] });
        }
        let avg = |f: fn(&RepetitionSpread) -> f64| (!reps.is_empty()).then(|| reps.iter().map(f).sum::<f64>() / reps.len() as f64);
        let medians: Vec<f64> = reps.iter().map(|r| r.median).collect();
        let mad = (!medians.is_empty()).then(|| {
            let m = stats::median(&medians);
            stats::median(&medians.iter().map(|v| crate::num::abs(v - m)).collect::<Vec<_>>())
        });
        cells.push(SubsampleCell {
            n_scanners: ns,
            n_train: nt,
            skipped: false,
            min: avg(|r| r.min),
            median: avg(|r| r.median),
            max: avg(|r| r.max),
            mad,
            repetitions: reps,
        });
    }
    Ok(cells)
}
