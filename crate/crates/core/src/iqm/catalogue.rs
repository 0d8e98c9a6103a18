//! The frozen list of IQMs and their variants.
//!
//! The default catalogue holds 166 entries grouped as follows (group name,
//! count): rank_error 5, slice_loss 32, sstats 14, entropy 2, bias 3,
//! filter_image 4, mask_volume 1, centroid 2, closing_mask 2, filter_mask 4,
//! seg_sstats 64, seg_volume 6, seg_SNR 10, seg_CNR 2, seg_CJV 2, seg_WM2max 2,
//! dl_slice 5, dl_stack 1, im_size 5.
//!
//! Naming: intensity metrics use `_full` for the unmasked whole image and
//! `_center` for the central third of the brain slices; mask metrics are
//! computed on the central third by default and use `_full` for all slices.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use thiserror::Error;

use super::dl::DlSliceVariant;
use super::intensity::{FilterKernel, MaskCombine, Pairing, RankErrorParams, SliceMetricKind, SlicePairParams, DEFAULT_WINDOW, RANK_THRESHOLD};
use super::mask::DEFAULT_CLOSING_LENGTH;
use crate::volume::Tissue;

/// Version tag of the catalogue layout; bump when names or order change.
pub const CATALOGUE_VERSION: &str = "fetqc-iqm-catalogue/1";

/// The catalogue as shipped, one descriptor per line.
pub const FROZEN_MANIFEST: &str = include_str!("../../catalogue_v1.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    Intensity,
    Mask,
    Seg,
    DeepLearning,
    Metadata,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Intensity => "intensity",
            Family::Mask => "mask",
            Family::Seg => "seg",
            Family::DeepLearning => "dl",
            Family::Metadata => "metadata",
        }
    }

    pub fn parse(s: &str) -> Option<Family> {
        [Family::Intensity, Family::Mask, Family::Seg, Family::DeepLearning, Family::Metadata]
            .into_iter()
            .find(|f| f.name() == s)
    }
}

/// Voxel selection for whole-volume intensity metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Selection {
    /// Every voxel of the grid.
    Full,
    /// Brain mask.
    Masked,
    /// Brain mask restricted to the central third of its slices.
    Center,
}

impl Selection {
    pub fn name(self) -> &'static str {
        match self {
            Selection::Full => "full",
            Selection::Masked => "masked",
            Selection::Center => "center",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntensityStat {
    Mean,
    Median,
    Std,
    P05,
    P95,
    Cov,
    Kurtosis,
}

impl IntensityStat {
    pub const ALL: [IntensityStat; 7] = [
        IntensityStat::Mean,
        IntensityStat::Median,
        IntensityStat::Std,
        IntensityStat::P05,
        IntensityStat::P95,
        IntensityStat::Cov,
        IntensityStat::Kurtosis,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IntensityStat::Mean => "mean",
            IntensityStat::Median => "median",
            IntensityStat::Std => "std",
            IntensityStat::P05 => "p05",
            IntensityStat::P95 => "p95",
            IntensityStat::Cov => "cov",
            IntensityStat::Kurtosis => "k",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionStat {
    Mean,
    Median,
    P05,
    P95,
    Kurtosis,
    Std,
    Mad,
    N,
}

impl RegionStat {
    pub const ALL: [RegionStat; 8] = [
        RegionStat::Mean,
        RegionStat::Median,
        RegionStat::P05,
        RegionStat::P95,
        RegionStat::Kurtosis,
        RegionStat::Std,
        RegionStat::Mad,
        RegionStat::N,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RegionStat::Mean => "mean",
            RegionStat::Median => "median",
            RegionStat::P05 => "p05",
            RegionStat::P95 => "p95",
            RegionStat::Kurtosis => "k",
            RegionStat::Std => "std",
            RegionStat::Mad => "mad",
            RegionStat::N => "N",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ImSize {
    X,
    Y,
    Z,
    VoxelVolume,
    PixelArea,
}

/// What a catalogue entry computes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    RankError(RankErrorParams),
    SlicePair(SlicePairParams),
    SummaryStat { stat: IntensityStat, center_only: bool },
    Entropy { masked: bool, bins: usize },
    Bias { selection: Selection, order: usize },
    FilterImage { kernel: FilterKernel, masked: bool },
    MaskVolume,
    Centroid { center_only: bool },
    ClosingMask { center_only: bool, line_len: usize },
    FilterMask { kernel: FilterKernel, center_only: bool },
    SegStat { tissue: Tissue, stat: RegionStat, center_only: bool },
    SegVolume { tissue: Tissue, center_only: bool },
    /// `None` is the mean over regions.
    Snr { tissue: Option<Tissue>, center_only: bool },
    Cnr { center_only: bool },
    Cjv { center_only: bool },
    Wm2Max { center_only: bool },
    DlSlice(DlSliceVariant),
    DlStack,
    ImSize(ImSize),
}

impl Metric {
    /// Compact `key=value` description used in the catalogue manifest.
    pub fn describe(&self) -> String {
        match self {
            Metric::RankError(p) => format!(
                "rank_error center_only={} relative={} masked={} threshold={}",
                p.center_only, p.relative, p.masked, p.threshold
            ),
            Metric::SlicePair(p) => {
                let pairing = match p.pairing {
                    Pairing::AllPairs => "all_pairs".to_string(),
                    Pairing::Window(k) => format!("window:{k}"),
                };
                format!("slice_pair kind={} pairing={} mask_combine={}", p.kind.name(), pairing, p.combine.name())
            }
            Metric::SummaryStat { stat, center_only } => format!("summary_stats stat={} center_only={}", stat.name(), center_only),
            Metric::Entropy { masked, bins } => format!("shannon_entropy masked={masked} bins={bins}"),
            Metric::Bias { selection, order } => format!("estimate_bias selection={} order={}", selection.name(), order),
            Metric::FilterImage { kernel, masked } => format!("sharpness_filter kernel={} masked={}", kernel.name(), masked),
            Metric::MaskVolume => "mask_volume".into(),
            Metric::Centroid { center_only } => format!("centroid_stat center_only={center_only}"),
            Metric::ClosingMask { center_only, line_len } => format!("closing_diff center_only={center_only} line_len={line_len}"),
            Metric::FilterMask { kernel, center_only } => format!("mask_sharpness kernel={} center_only={}", kernel.name(), center_only),
            Metric::SegStat { tissue, stat, center_only } => {
                format!("region_summary_stats region={} stat={} center_only={}", tissue.name(), stat.name(), center_only)
            }
            Metric::SegVolume { tissue, center_only } => format!("region_volumes region={} center_only={}", tissue.name(), center_only),
            Metric::Snr { tissue, center_only } => {
                format!("snr_region region={} center_only={}", tissue.map_or("total", |t| t.name()), center_only)
            }
            Metric::Cnr { center_only } => format!("cnr center_only={center_only}"),
            Metric::Cjv { center_only } => format!("cjv center_only={center_only}"),
            Metric::Wm2Max { center_only } => format!("wm2max center_only={center_only}"),
            Metric::DlSlice(v) => format!("dl_slice_aggregate variant={}", v.name()),
            Metric::DlStack => "dl_stack_input".into(),
            Metric::ImSize(s) => format!("im_size which={s:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IqmDescriptor {
    pub name: String,
    pub family: Family,
    /// Table-level group the entry is counted under (e.g. `slice_loss`).
    pub group: &'static str,
    pub metric: Metric,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogueError {
    #[error("catalogue overrides produce a duplicate IQM name `{0}`")]
    ConfigConflict(String),
    #[error("rename source `{0}` is not in the catalogue")]
    UnknownName(String),
}

/// Overrides applied on top of the default catalogue.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogueConfig {
    pub disabled_families: BTreeSet<Family>,
    /// `(old, new)` name substitutions.
    pub renames: Vec<(String, String)>,
    pub window_k: usize,
    pub closing_line_len: usize,
    pub bias_order: usize,
    pub rank_threshold: f64,
    pub histogram_bins: usize,
}

impl Default for CatalogueConfig {
    fn default() -> Self {
        Self {
            disabled_families: BTreeSet::new(),
            renames: Vec::new(),
            window_k: DEFAULT_WINDOW,
            closing_line_len: DEFAULT_CLOSING_LENGTH,
            bias_order: 3,
            rank_threshold: RANK_THRESHOLD,
            histogram_bins: super::intensity::HISTOGRAM_BINS,
        }
    }
}

/// Ordered, immutable IQM list.
#[derive(Debug, Clone, PartialEq)]
pub struct IqmCatalogue {
    descriptors: Vec<IqmDescriptor>,
    names: Arc<[String]>,
}

impl IqmCatalogue {
    pub fn descriptors(&self) -> &[IqmDescriptor] {
        &self.descriptors
    }

    pub fn names(&self) -> &Arc<[String]> {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }

    /// Number of entries per group, in catalogue order of first appearance.
    pub fn group_counts(&self) -> Vec<(&'static str, usize)> {
        let mut out: Vec<(&'static str, usize)> = Vec::new();
        for d in &self.descriptors {
            match out.iter_mut().find(|(g, _)| *g == d.group) {
                Some((_, c)) => *c += 1,
                None => out.push((d.group, 1)),
            }
        }
        out
    }

    pub fn family_count(&self, family: Family) -> usize {
        self.descriptors.iter().filter(|d| d.family == family).count()
    }

    /// Tab-separated manifest: a version line, a header, then one line per IQM.
    pub fn to_manifest(&self) -> String {
        let mut s = format!("# {CATALOGUE_VERSION}\nname\tfamily\tgroup\toperation\n");
        for d in &self.descriptors {
            s.push_str(&format!("{}\t{}\t{}\t{}\n", d.name, d.family.name(), d.group, d.metric.describe()));
        }
        s
    }
}

/// Builds the catalogue; see the module documentation for its layout.
pub fn build_catalogue(config: &CatalogueConfig) -> Result<IqmCatalogue, CatalogueError> {
    let mut v: Vec<IqmDescriptor> = Vec::with_capacity(166);
    let mut push = |name: String, family: Family, group: &'static str, metric: Metric| {
        v.push(IqmDescriptor { name, family, group, metric });
    };
    use Family::*;

    // Intensity-based.
    let rank = |center_only, relative, masked| {
        Metric::RankError(RankErrorParams { center_only, relative, masked, threshold: config.rank_threshold })
    };
    push("rank_error".into(), Intensity, "rank_error", rank(false, false, true));
    push("rank_error_center".into(), Intensity, "rank_error", rank(true, false, true));
    push("rank_error_relative".into(), Intensity, "rank_error", rank(false, true, true));
    push("rank_error_center_relative".into(), Intensity, "rank_error", rank(true, true, true));
    push("rank_error_full".into(), Intensity, "rank_error", rank(false, false, false));

    let pair = |kind, pairing, combine| Metric::SlicePair(SlicePairParams { kind, pairing, combine });
    for kind in SliceMetricKind::ALL {
        push(kind.name().into(), Intensity, "slice_loss", pair(kind, Pairing::AllPairs, MaskCombine::None));
        push(format!("{}_window", kind.name()), Intensity, "slice_loss", pair(kind, Pairing::Window(config.window_k), MaskCombine::None));
    }
    for kind in [
        SliceMetricKind::Ncc,
        SliceMetricKind::Ssim,
        SliceMetricKind::NRmse,
        SliceMetricKind::Mi,
        SliceMetricKind::NMi,
        SliceMetricKind::JointEntropy,
    ] {
        for combine in [MaskCombine::Intersection, MaskCombine::Union] {
            push(format!("{}_{}", kind.name(), combine.name()), Intensity, "slice_loss", pair(kind, Pairing::AllPairs, combine));
        }
    }

    for center_only in [false, true] {
        for stat in IntensityStat::ALL {
            let suffix = if center_only { "_center" } else { "" };
            push(format!("sstats_{}{}", stat.name(), suffix), Intensity, "sstats", Metric::SummaryStat { stat, center_only });
        }
    }
    push("entropy".into(), Intensity, "entropy", Metric::Entropy { masked: true, bins: config.histogram_bins });
    push("entropy_full".into(), Intensity, "entropy", Metric::Entropy { masked: false, bins: config.histogram_bins });
    push("bias".into(), Intensity, "bias", Metric::Bias { selection: Selection::Masked, order: config.bias_order });
    push("bias_full".into(), Intensity, "bias", Metric::Bias { selection: Selection::Full, order: config.bias_order });
    push("bias_center".into(), Intensity, "bias", Metric::Bias { selection: Selection::Center, order: config.bias_order });
    for kernel in [FilterKernel::Laplace, FilterKernel::Sobel] {
        push(format!("filter_image_{}", kernel.name()), Intensity, "filter_image", Metric::FilterImage { kernel, masked: true });
        push(format!("filter_image_{}_full", kernel.name()), Intensity, "filter_image", Metric::FilterImage { kernel, masked: false });
    }

    // Mask-based.
    push("mask_volume".into(), Mask, "mask_volume", Metric::MaskVolume);
    push("centroid".into(), Mask, "centroid", Metric::Centroid { center_only: true });
    push("centroid_full".into(), Mask, "centroid", Metric::Centroid { center_only: false });
    let line_len = config.closing_line_len;
    push("closing_mask".into(), Mask, "closing_mask", Metric::ClosingMask { center_only: true, line_len });
    push("closing_mask_full".into(), Mask, "closing_mask", Metric::ClosingMask { center_only: false, line_len });
    for kernel in [FilterKernel::Laplace, FilterKernel::Sobel] {
        push(format!("filter_mask_{}", kernel.name()), Mask, "filter_mask", Metric::FilterMask { kernel, center_only: true });
        push(format!("filter_mask_{}_full", kernel.name()), Mask, "filter_mask", Metric::FilterMask { kernel, center_only: false });
    }

    // Segmentation-based.
    for center_only in [false, true] {
        let suffix = if center_only { "_center" } else { "" };
        for tissue in Tissue::ALL {
            for stat in RegionStat::ALL {
                push(
                    format!("seg_sstats_{}_{}{}", tissue.name(), stat.name(), suffix),
                    Seg,
                    "seg_sstats",
                    Metric::SegStat { tissue, stat, center_only },
                );
            }
        }
    }
    for center_only in [false, true] {
        let suffix = if center_only { "_center" } else { "" };
        for tissue in [Tissue::Csf, Tissue::Gm, Tissue::Wm] {
            push(format!("seg_volume_{}{}", tissue.name(), suffix), Seg, "seg_volume", Metric::SegVolume { tissue, center_only });
        }
    }
    for center_only in [false, true] {
        let suffix = if center_only { "_center" } else { "" };
        for tissue in Tissue::ALL.map(Some).into_iter().chain([None]) {
            let region = tissue.map_or("total", |t| t.name());
            push(format!("seg_SNR_{region}{suffix}"), Seg, "seg_SNR", Metric::Snr { tissue, center_only });
        }
    }
    for (group, make) in [
        ("seg_CNR", (|c| Metric::Cnr { center_only: c }) as fn(bool) -> Metric),
        ("seg_CJV", |c| Metric::Cjv { center_only: c }),
        ("seg_WM2max", |c| Metric::Wm2Max { center_only: c }),
    ] {
        push(group.into(), Seg, group, make(false));
        push(format!("{group}_center"), Seg, group, make(true));
    }

    // Deep-learning scores are precomputed inputs.
    for variant in DlSliceVariant::ALL {
        push(variant.name().into(), DeepLearning, "dl_slice", Metric::DlSlice(variant));
    }
    push("dl_stack".into(), DeepLearning, "dl_stack", Metric::DlStack);

    // Metadata.
    for (name, which) in [
        ("im_size_x", ImSize::X),
        ("im_size_y", ImSize::Y),
        ("im_size_z", ImSize::Z),
        ("im_size_vx_size", ImSize::VoxelVolume),
        ("im_size_inplane", ImSize::PixelArea),
    ] {
        push(name.into(), Metadata, "im_size", Metric::ImSize(which));
    }

    v.retain(|d| !config.disabled_families.contains(&d.family));
    for (old, new) in &config.renames {
        let d = v.iter_mut().find(|d| &d.name == old).ok_or_else(|| CatalogueError::UnknownName(old.clone()))?;
        d.name = new.clone();
    }
    let mut seen = BTreeSet::new();
    for d in &v {
        if !seen.insert(d.name.as_str()) {
            return Err(CatalogueError::ConfigConflict(d.name.clone()));
        }
    }
    let names: Arc<[String]> = v.iter().map(|d| d.name.clone()).collect::<Vec<_>>().into();
    Ok(IqmCatalogue { descriptors: v, names })
}
