//! Image quality metrics (IQMs).
//!
//! Every metric is a pure function of immutable inputs. A metric that cannot
//! be evaluated returns a [`MetricError`]; the extraction layer turns that into
//! a zero value plus a raised `<name>_nan` flag so that feature vectors stay
//! real-valued.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use thiserror::Error;

pub mod catalogue;
pub mod dl;
pub mod extract;
pub mod intensity;
pub mod mask;
pub mod seg;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("need at least {needed} slices with brain voxels, found {found}")]
    TooFewSlices { needed: usize, found: usize },
    #[error("selected region is empty")]
    EmptyRegion,
    #[error("mask is empty")]
    EmptyMask,
    #[error("every slice pair was degenerate")]
    DegeneratePair,
    #[error("polynomial bias fit is rank deficient")]
    SingularFit,
    #[error("region has zero variance")]
    ZeroVariance,
    #[error("all tissue standard deviations are zero")]
    AllZeroStd,
    #[error("white and gray matter means are equal")]
    EqualMeans,
    #[error("image is constant")]
    ConstantImage,
    #[error("slice matrix has zero energy")]
    ZeroEnergy,
    #[error("grid {0:?} is too small for a 3x3x3 stencil")]
    GridTooSmall([usize; 3]),
    #[error("label {0} has no group in the merge table")]
    UnmappedLabel(u32),
    #[error("input grids do not match")]
    GridMismatch,
    #[error("statistic is undefined for this region")]
    Undefined,
    #[error("required input is missing: {0}")]
    MissingInput(&'static str),
}

/// Converts a metric outcome to `(value, failed)` following the NaN-flag rule.
pub fn flag_value(r: Result<f64, MetricError>) -> (f64, bool) {
    match r {
        Ok(v) if v.is_finite() => (v, false),
        _ => (0.0, true),
    }
}

/// All IQM values of one stack, in catalogue order, with failure flags.
#[derive(Debug, Clone, PartialEq)]
pub struct IqmVector {
    pub stack_id: String,
    names: Arc<[String]>,
    values: Vec<f64>,
    flags: Vec<bool>,
}

impl IqmVector {
    /// Builds a vector from raw outcomes; non-finite values become flagged zeros.
    pub fn from_outcomes(
        stack_id: String,
        names: Arc<[String]>,
        outcomes: impl IntoIterator<Item = Result<f64, MetricError>>,
    ) -> Self {
        let (values, flags): (Vec<f64>, Vec<bool>) = outcomes.into_iter().map(flag_value).unzip();
        assert_eq!(values.len(), names.len(), "one outcome per catalogue entry");
        Self { stack_id, names, values, flags }
    }

    /// Rebuilds a vector from stored values and flags (e.g. a CSV row).
    pub fn from_parts(stack_id: String, names: Arc<[String]>, values: Vec<f64>, flags: Vec<bool>) -> Self {
        assert_eq!(values.len(), names.len());
        assert_eq!(flags.len(), names.len());
        Self { stack_id, names, values, flags }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<(f64, bool)> {
        let i = self.names.iter().position(|n| n == name)?;
        Some((self.values[i], self.flags[i]))
    }

    /// Feature names of the doubled vector: every value column, then every
    /// `<name>_nan` flag column.
    pub fn feature_names(names: &[String]) -> Vec<String> {
        let mut out: Vec<String> = names.to_vec();
        out.extend(names.iter().map(|n| alloc::format!("{n}_nan")));
        out
    }

    /// The doubled feature row (values then flags as 0/1), matching
    /// [`IqmVector::feature_names`].
    pub fn features(&self) -> Vec<f64> {
        let mut out = self.values.clone();
        out.extend(self.flags.iter().map(|&f| if f { 1.0 } else { 0.0 }));
        out
    }
}
