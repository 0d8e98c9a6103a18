//! Stack-parallel IQM extraction from files.

use std::collections::HashMap;

use fetqc_core::iqm::dl::DlInputs;
use fetqc_core::iqm::extract::{extract, Extraction, StackInputs};
use fetqc_core::iqm::seg::{merge_labels, LabelMerge};
use fetqc_core::phantom::fallback_mask;
use fetqc_core::{IqmCatalogue, StackRecord};
use rayon::prelude::*;
use thiserror::Error;

use crate::nifti::{read_labelmap, read_mask, read_nifti, NiftiError};

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("stack `{stack_id}`: {source}")]
    Ingest { stack_id: String, source: NiftiError },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

/// Inputs shared by every stack of an extraction run.
#[derive(Debug, Clone)]
pub struct ExtractOptions {
    pub label_mapping: LabelMerge,
    /// Precomputed deep-learning scores by stack id.
    pub dl: HashMap<String, DlInputs>,
    /// Derive a mask from intensities when a record has none.
    pub fallback_mask: bool,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self { label_mapping: LabelMerge::fetal_default(), dl: HashMap::new(), fallback_mask: false }
    }
}

/// Loads one stack and evaluates the whole catalogue. Only file errors are
/// returned; metric failures become flags.
pub fn extract_record(record: &StackRecord, catalogue: &IqmCatalogue, opts: &ExtractOptions) -> Result<Extraction, ExtractError> {
    let ingest = |source| ExtractError::Ingest { stack_id: record.stack_id.clone(), source };
    let vol = read_nifti(record.image_path.as_ref()).map_err(ingest)?;
    let mask = match &record.mask_path {
        Some(p) => Some(read_mask(p.as_ref()).map_err(ingest)?),
        None if opts.fallback_mask => Some(fallback_mask(&vol)),
        None => None,
    };
    let labels = match &record.labelmap_path {
        Some(p) => Some(read_labelmap(p.as_ref()).map_err(ingest)?),
        None => None,
    };
    let tissues = labels.as_ref().and_then(|l| merge_labels(l, &opts.label_mapping).ok());
    let mut inputs = StackInputs::new(&vol);
    if let Some(m) = &mask {
        inputs = inputs.with_mask(m);
    }
    if let Some(t) = &tissues {
        inputs = inputs.with_tissues(t);
    }
    if let Some(d) = opts.dl.get(&record.stack_id) {
        inputs = inputs.with_dl(d);
    }
    Ok(extract(record.stack_id.clone(), catalogue, inputs))
}

/// Extracts every record on `jobs` worker threads (0 = one per core). Output
/// order follows `records` and does not depend on `jobs`.
pub fn extract_all(records: &[StackRecord], catalogue: &IqmCatalogue, opts: &ExtractOptions, jobs: usize) -> Result<Vec<Extraction>, ExtractError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| ExtractError::Pool(e.to_string()))?;
    pool.install(|| records.par_iter().map(|r| extract_record(r, catalogue, opts)).collect())
}
