//! Rating records, the append-only JSON-lines log and label aggregation.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RatingsError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}, line {line}: {message}")]
    Corrupt { path: PathBuf, line: usize, message: String },
    #[error("invalid rating: {0}")]
    Invalid(String),
    #[error("no ratings to aggregate")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Axial,
    Coronal,
    Sagittal,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grading {
    #[default]
    None,
    Mild,
    Moderate,
    Severe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArtifactGradings {
    pub motion_inplane: Grading,
    pub motion_throughplane: Grading,
    pub bias: Grading,
    pub noise: Grading,
    pub fov_incomplete: Grading,
}

/// A rating as submitted, before the server stamps it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatingSubmission {
    pub stack_id: String,
    pub rater_id: String,
    pub quality: f64,
    pub orientation: Orientation,
    pub artifacts: ArtifactGradings,
    #[serde(default)]
    pub comment: String,
    pub duration_s: f64,
}

impl RatingSubmission {
    pub fn validate(&self) -> Result<(), RatingsError> {
        if self.stack_id.is_empty() {
            return Err(RatingsError::Invalid("stack_id is empty".into()));
        }
        if self.rater_id.is_empty() {
            return Err(RatingsError::Invalid("rater_id is empty".into()));
        }
        if !(self.quality.is_finite() && (0.0..=4.0).contains(&self.quality)) {
            return Err(RatingsError::Invalid(format!("quality {} outside [0, 4]", self.quality)));
        }
        if !(self.duration_s.is_finite() && self.duration_s >= 0.0) {
            return Err(RatingsError::Invalid(format!("duration_s {} must be a non-negative number", self.duration_s)));
        }
        Ok(())
    }

    pub fn stamp(self, timestamp: u64) -> RatingRecord {
        RatingRecord {
            stack_id: self.stack_id,
            rater_id: self.rater_id,
            quality: self.quality,
            orientation: self.orientation,
            artifacts: self.artifacts,
            comment: self.comment,
            timestamp,
            duration_s: self.duration_s,
        }
    }
}

/// A stored rating; `timestamp` is in milliseconds since the Unix epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatingRecord {
    pub stack_id: String,
    pub rater_id: String,
    pub quality: f64,
    pub orientation: Orientation,
    pub artifacts: ArtifactGradings,
    pub comment: String,
    pub timestamp: u64,
    pub duration_s: f64,
}

impl RatingRecord {
    pub fn submission(&self) -> RatingSubmission {
        RatingSubmission {
            stack_id: self.stack_id.clone(),
            rater_id: self.rater_id.clone(),
            quality: self.quality,
            orientation: self.orientation,
            artifacts: self.artifacts,
            comment: self.comment.clone(),
            duration_s: self.duration_s,
        }
    }
}

/// Parses a JSON-lines log; a malformed or invalid line is an error.
pub fn read_ratings(path: &Path) -> Result<Vec<RatingRecord>, RatingsError> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(source) => return Err(RatingsError::Io { path: path.to_path_buf(), source }),
    };
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let corrupt = |message: String| RatingsError::Corrupt { path: path.to_path_buf(), line: i + 1, message };
        let r: RatingRecord = serde_json::from_str(line).map_err(|e| corrupt(e.to_string()))?;
        r.submission().validate().map_err(|e| corrupt(e.to_string()))?;
        out.push(r);
    }
    Ok(out)
}

/// Append-only ratings log. Timestamps are strictly increasing.
#[derive(Debug)]
pub struct RatingsLog {
    path: PathBuf,
    file: File,
    records: Vec<RatingRecord>,
}

impl RatingsLog {
    /// Opens (creating if needed) a log, refusing corrupt content.
    pub fn open(path: &Path) -> Result<Self, RatingsError> {
        let records = read_ratings(path)?;
        let file = OpenOptions::new().create(true).append(true).open(path).map_err(|source| RatingsError::Io { path: path.to_path_buf(), source })?;
        Ok(Self { path: path.to_path_buf(), file, records })
    }

    pub fn records(&self) -> &[RatingRecord] {
        &self.records
    }

    /// Validates, stamps with `max(now_ms, last + 1)` and appends.
    pub fn append(&mut self, sub: RatingSubmission, now_ms: u64) -> Result<RatingRecord, RatingsError> {
        sub.validate()?;
        let last = self.records.iter().map(|r| r.timestamp).max();
        let ts = last.map_or(now_ms, |l| now_ms.max(l + 1));
        let rec = sub.stamp(ts);
        let mut line = serde_json::to_string(&rec).map_err(|e| RatingsError::Invalid(e.to_string()))?;
        line.push('\n');
        self.file
            .write_all(line.as_bytes())
            .and_then(|_| self.file.flush())
            .map_err(|source| RatingsError::Io { path: self.path.clone(), source })?;
        self.records.push(rec.clone());
        Ok(rec)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AggregationPolicy {
    /// Latest rating of the primary rater (by default the rater with the most
    /// rated stacks, ties broken by name).
    LatestPerRater { primary: Option<String> },
    /// Mean over raters of each rater's latest rating.
    MeanAcrossRaters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairedRating {
    pub stack_id: String,
    pub rater_a: String,
    pub rater_b: String,
    pub quality_a: f64,
    pub quality_b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregation {
    pub labels: Vec<(String, f64)>,
    /// For every pair of raters, the stacks both rated.
    pub paired: Vec<PairedRating>,
    /// Stack ids absent from the manifest, skipped.
    pub unknown: Vec<String>,
}

/// Latest rating per (stack, rater): the largest timestamp, later entries
/// winning ties.
pub fn latest_per_rater(records: &[RatingRecord]) -> BTreeMap<(String, String), &RatingRecord> {
    let mut m: BTreeMap<(String, String), &RatingRecord> = BTreeMap::new();
    for r in records {
        let key = (r.stack_id.clone(), r.rater_id.clone());
        match m.get(&key) {
            Some(prev) if prev.timestamp > r.timestamp => {}
            _ => {
                m.insert(key, r);
            }
        }
    }
    m
}

/// Aggregates ratings into labels. With `order`, labels follow that stack
/// order and ids outside it are reported as unknown.
pub fn aggregate_ratings(records: &[RatingRecord], policy: &AggregationPolicy, order: Option<&[String]>) -> Result<Aggregation, RatingsError> {
    let known: Option<HashSet<&str>> = order.map(|o| o.iter().map(String::as_str).collect());
    let mut unknown = BTreeSet::new();
    let kept: Vec<RatingRecord> = records
        .iter()
        .filter(|r| {
            let ok = known.as_ref().is_none_or(|k| k.contains(r.stack_id.as_str()));
            if !ok {
                unknown.insert(r.stack_id.clone());
            }
            ok
        })
        .cloned()
        .collect();
    if kept.is_empty() {
        return Err(RatingsError::Empty);
    }
    let latest = latest_per_rater(&kept);
    let mut by_stack: BTreeMap<&str, BTreeMap<&str, f64>> = BTreeMap::new();
    for ((s, r), rec) in &latest {
        by_stack.entry(s.as_str()).or_default().insert(r.as_str(), rec.quality);
    }
    let policy_resolved;
    let policy = match policy {
        AggregationPolicy::LatestPerRater { primary: None } => {
            let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
            for (_, r) in latest.keys() {
                *counts.entry(r.as_str()).or_default() += 1;
            }
            let best = counts.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).map(|(r, _)| r.to_string());
            policy_resolved = AggregationPolicy::LatestPerRater { primary: best };
            &policy_resolved
        }
        p => p,
    };
    let value = |raters: &BTreeMap<&str, f64>| -> Option<f64> {
        match policy {
            AggregationPolicy::MeanAcrossRaters => Some(raters.values().sum::<f64>() / raters.len() as f64),
            AggregationPolicy::LatestPerRater { primary } => raters.get(primary.as_deref().unwrap_or_default()).copied(),
        }
    };
    let ids: Vec<&str> = match order {
        Some(o) => o.iter().map(String::as_str).filter(|s| by_stack.contains_key(s)).collect(),
        None => by_stack.keys().copied().collect(),
    };
    let labels = ids.iter().filter_map(|s| value(&by_stack[s]).map(|v| (s.to_string(), v))).collect();
    let mut paired = Vec::new();
    for s in &ids {
        let raters: Vec<(&&str, &f64)> = by_stack[s].iter().collect();
        for i in 0..raters.len() {
            for j in i + 1..raters.len() {
                paired.push(PairedRating {
                    stack_id: s.to_string(),
                    rater_a: raters[i].0.to_string(),
                    rater_b: raters[j].0.to_string(),
                    quality_a: *raters[i].1,
                    quality_b: *raters[j].1,
                });
            }
        }
    }
    Ok(Aggregation { labels, paired, unknown: unknown.into_iter().collect() })
}

/// Writes the paired table as TSV.
pub fn write_paired(path: &Path, paired: &[PairedRating]) -> Result<(), RatingsError> {
    let mut s = String::from("stack_id\trater_a\trater_b\tquality_a\tquality_b\n");
    for p in paired {
        s += &format!("{}\t{}\t{}\t{}\t{}\n", p.stack_id, p.rater_a, p.rater_b, p.quality_a, p.quality_b);
    }
    std::fs::write(path, s).map_err(|source| RatingsError::Io { path: path.to_path_buf(), source })
}

/// Paired qualities of two raters, for agreement metrics.
pub fn paired_columns(paired: &[PairedRating], a: &str, b: &str) -> (Vec<f64>, Vec<f64>) {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for p in paired {
        if p.rater_a == a && p.rater_b == b {
            x.push(p.quality_a);
            y.push(p.quality_b);
        } else if p.rater_a == b && p.rater_b == a {
            x.push(p.quality_b);
            y.push(p.quality_a);
        }
    }
    (x, y)
}

/// Ratings per stack id, convenient for the service.
pub fn rated_by(records: &[RatingRecord], rater: Option<&str>) -> HashMap<String, usize> {
    let mut m = HashMap::new();
    for r in records.iter().filter(|r| rater.is_none_or(|x| x == r.rater_id)) {
        *m.entry(r.stack_id.clone()).or_default() += 1;
    }
    m
}
