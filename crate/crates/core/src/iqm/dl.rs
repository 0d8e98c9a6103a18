//! Aggregation of precomputed slice-wise and stack-wise network scores.
//!
//! The networks themselves are external; this module only turns their
//! per-slice probabilities into the five `dl_slice` variants.

use alloc::vec::Vec;

use super::MetricError;
use crate::stats;
use crate::volume::center_third;

/// Image region a slice score was computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DlRoi {
    Full,
    Crop,
}

impl DlRoi {
    pub fn name(self) -> &'static str {
        match self {
            DlRoi::Full => "full",
            DlRoi::Crop => "crop",
        }
    }

    pub fn parse(s: &str) -> Option<DlRoi> {
        match s {
            "full" | "" => Some(DlRoi::Full),
            "crop" => Some(DlRoi::Crop),
            _ => None,
        }
    }
}

/// One row of the slice-score sidecar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DlSliceScore {
    pub slice_index: usize,
    pub p_pass: f64,
    pub p_fail: f64,
    pub roi: DlRoi,
}

/// Precomputed network outputs for one stack.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DlInputs {
    pub slices: Vec<DlSliceScore>,
    pub stack: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DlSliceVariant {
    Full,
    Center,
    Crop,
    CenterCrop,
    PGood,
}

impl DlSliceVariant {
    pub const ALL: [DlSliceVariant; 5] = [
        DlSliceVariant::Full,
        DlSliceVariant::Center,
        DlSliceVariant::Crop,
        DlSliceVariant::CenterCrop,
        DlSliceVariant::PGood,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DlSliceVariant::Full => "dl_slice",
            DlSliceVariant::Center => "dl_slice_center",
            DlSliceVariant::Crop => "dl_slice_crop",
            DlSliceVariant::CenterCrop => "dl_slice_center_crop",
            DlSliceVariant::PGood => "dl_slice_pgood",
        }
    }

    fn roi(self) -> DlRoi {
        match self {
            DlSliceVariant::Crop | DlSliceVariant::CenterCrop => DlRoi::Crop,
            _ => DlRoi::Full,
        }
    }

    fn center_only(self) -> bool {
        matches!(self, DlSliceVariant::Center | DlSliceVariant::CenterCrop)
    }
}

/// Mean of `p_pass - p_fail` over the selected slices (in `[-1, 1]`), or mean
/// `p_pass` for [`DlSliceVariant::PGood`].
pub fn dl_slice_aggregate(scores: &[DlSliceScore], variant: DlSliceVariant) -> Result<f64, MetricError> {
    let mut rows: Vec<&DlSliceScore> = scores.iter().filter(|s| s.roi == variant.roi()).collect();
    if rows.is_empty() {
        return Err(MetricError::MissingInput("dl_slice"));
    }
    rows.sort_by_key(|s| s.slice_index);
    if variant.center_only() {
        let mut idx: Vec<usize> = rows.iter().map(|s| s.slice_index).collect();
        idx.dedup();
        let keep = center_third(&idx);
        rows.retain(|s| keep.binary_search(&s.slice_index).is_ok());
    }
    let values: Vec<f64> = rows
        .iter()
        .map(|s| if variant == DlSliceVariant::PGood { s.p_pass } else { s.p_pass - s.p_fail })
        .collect();
    Ok(stats::mean(&values))
}
