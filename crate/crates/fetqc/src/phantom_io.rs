//! Writes synthetic datasets in the BIDS-lite layout.

use std::path::{Path, PathBuf};

use fetqc_core::phantom::{gen_stack, noisy_rating, plan_dataset, DatasetConfig, GroundTruthQuality, PhantomError};
use fetqc_core::StackRecord;
use rayon::prelude::*;
use thiserror::Error;

use crate::dataset::{bids_image_path, labelmap_path_for, mask_path_for, write_manifest, DatasetError};
use crate::nifti::{write_labelmap, write_mask, write_nifti, NiftiError};
use crate::tables::{format_sig9, write_labels, TableError};

pub const MANIFEST_FILE: &str = "manifest.tsv";
pub const LABELS_FILE: &str = "labels.csv";
pub const TRUTH_FILE: &str = "ground_truth.tsv";

#[derive(Debug, Error)]
pub enum PhantomIoError {
    #[error(transparent)]
    Phantom(#[from] PhantomError),
    #[error(transparent)]
    Nifti(#[from] NiftiError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// What was written.
#[derive(Debug, Clone, PartialEq)]
pub struct PhantomDataset {
    pub records: Vec<StackRecord>,
    pub ratings: Vec<f64>,
    pub truth: Vec<GroundTruthQuality>,
}

/// Generates and writes every planned stack under `root`, plus the manifest,
/// the labels CSV and a ground-truth table. Output bytes depend only on `cfg`.
pub fn write_phantom_dataset(root: &Path, cfg: &DatasetConfig) -> Result<PhantomDataset, PhantomIoError> {
    let plan = plan_dataset(cfg)?;
    std::fs::create_dir_all(root).map_err(|source| PhantomIoError::Io { path: root.to_path_buf(), source })?;
    let written: Vec<(StackRecord, f64, GroundTruthQuality)> = plan
        .stacks
        .par_iter()
        .enumerate()
        .map(|(i, p)| -> Result<_, PhantomIoError> {
            let s = gen_stack(&p.spec)?;
            let rel = bids_image_path(&p.record.subject_id, None, &p.record.run_id);
            let image = root.join(&rel);
            let dir = image.parent().unwrap_or(root);
            std::fs::create_dir_all(dir).map_err(|source| PhantomIoError::Io { path: dir.to_path_buf(), source })?;
            let mask = mask_path_for(&image);
            let labels = labelmap_path_for(&image);
            write_nifti(&image, &s.volume)?;
            write_mask(&mask, &s.mask, &s.volume)?;
            write_labelmap(&labels, &s.labels, &s.volume)?;
            let mut r = p.record.clone();
            r.image_path = image.to_string_lossy().into_owned();
            r.mask_path = Some(mask.to_string_lossy().into_owned());
            r.labelmap_path = Some(labels.to_string_lossy().into_owned());
            let scanner = plan.scanners.iter().position(|sc| sc.id == r.scanner_id).unwrap_or(i);
            r.tr_ms = Some(1000.0 + 100.0 * (scanner % 6) as f64);
            r.te_ms = Some(80.0 + 10.0 * (scanner % 7) as f64);
            let rating = noisy_rating(s.quality.score, plan.rater_noise, p.rating_seed);
            Ok((r, rating, s.quality))
        })
        .collect::<Result<_, _>>()?;
    let records: Vec<StackRecord> = written.iter().map(|w| w.0.clone()).collect();
    write_manifest(&root.join(MANIFEST_FILE), &records)?;
    let labels: Vec<(String, f64)> = written.iter().map(|w| (w.0.stack_id.clone(), w.1)).collect();
    write_labels(&root.join(LABELS_FILE), &labels)?;
    let mut truth = String::from("stack_id\tscore\tmotion_rms_mm\tdrop_fraction\tbias_amplitude\tnoise_std\tfov_fraction\n");
    for (r, _, q) in &written {
        let s = q.severities;
        let cols = [q.score, s.motion_rms_mm, s.drop_fraction, s.bias_amplitude, s.noise_std, s.fov_fraction].map(format_sig9);
        truth += &format!("{}\t{}\n", r.stack_id, cols.join("\t"));
    }
    let tp = root.join(TRUTH_FILE);
    std::fs::write(&tp, truth).map_err(|source| PhantomIoError::Io { path: tp, source })?;
    Ok(PhantomDataset { records, ratings: written.iter().map(|w| w.1).collect(), truth: written.iter().map(|w| w.2).collect() })
}
