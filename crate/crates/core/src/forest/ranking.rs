//! Correlation-grouped feature ranking for reduced models.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng as _;

use super::{FeatureTable, ForestError};
use crate::num;
use crate::rng::{derive_seed, rng_from_seed, stream};
use crate::stats;

/// Features grouped by correlation and ranked by importance.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRanking {
    /// Groups of feature names, in ranking order.
    pub groups: Vec<Vec<String>>,
    /// One member per group, aligned with `groups`.
    pub representatives: Vec<String>,
    /// Mean of the QC and QA importances summed over each group's members.
    pub scores: Vec<f64>,
    /// The first `k` representatives after exclusions.
    pub selected: Vec<String>,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Groups features by single linkage on `|pearson| > threshold`, picks a
/// random representative per group (never an excluded name while a member
/// remains eligible), ranks groups by their averaged QC and QA importance and
/// keeps the top `k`. Groups made only of excluded features are dropped.
pub fn correlation_group_rank(
    x: &FeatureTable,
    importance_qc: &[f64],
    importance_qa: &[f64],
    threshold: f64,
    k: usize,
    exclude: &[&str],
    seed: u64,
) -> Result<FeatureRanking, ForestError> {
    let p = x.n_features();
    if p < k {
        return Err(ForestError::TooFewFeatures { needed: k, found: p });
    }
    if importance_qc.len() != p || importance_qa.len() != p {
        return Err(ForestError::RowLength { row: 0, expected: p, found: importance_qc.len().min(importance_qa.len()) });
    }
    let cols = x.columns();
    let mut parent: Vec<usize> = (0..p).collect();
    for i in 0..p {
        for j in (i + 1)..p {
            if find(&mut parent, i) == find(&mut parent, j) {
                continue;
            }
            if let Some(r) = stats::pearson(&cols[i], &cols[j]) {
                if num::abs(r) > threshold {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut root_slot: Vec<Option<usize>> = alloc::vec![None; p];
    for i in 0..p {
        let r = find(&mut parent, i);
        match root_slot[r] {
            Some(s) => members[s].push(i),
            None => {
                root_slot[r] = Some(members.len());
                members.push(alloc::vec![i]);
            }
        }
    }
    let mut rng = rng_from_seed(derive_seed(seed, stream::RANKING, 0));
    let names = x.names();
    let mut ranked: Vec<(f64, Vec<usize>, usize, bool)> = members
        .into_iter()
        .map(|g| {
            let score: f64 = g.iter().map(|&i| (importance_qc[i] + importance_qa[i]) / 2.0).sum();
            let eligible: Vec<usize> = g.iter().copied().filter(|&i| !exclude.contains(&names[i].as_str())).collect();
            let pool = if eligible.is_empty() { &g } else { &eligible };
            let rep = pool[rng.gen_range(0..pool.len())];
            (score, g, rep, eligible.is_empty())
        })
        .collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1[0].cmp(&b.1[0])));
    let selected = ranked.iter().filter(|r| !r.3).take(k).map(|r| names[r.2].clone()).collect();
    Ok(FeatureRanking {
        groups: ranked.iter().map(|r| r.1.iter().map(|&i| names[i].clone()).collect()).collect(),
        representatives: ranked.iter().map(|r| names[r.2].clone()).collect(),
        scores: ranked.iter().map(|r| r.0).collect(),
        selected,
    })
}
