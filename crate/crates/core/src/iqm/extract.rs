//! Evaluation of a catalogue on one stack.

use alloc::string::String;
use alloc::vec::Vec;

use super::catalogue::{ImSize, IntensityStat, IqmCatalogue, Metric, RegionStat, Selection};
use super::dl::{dl_slice_aggregate, DlInputs};
use super::intensity::{estimate_bias, rank_error, shannon_entropy, sharpness_filter, slice_pair_metric, summary_stats};
use super::mask::{centroid_stat, closing_diff, mask_sharpness, mask_volume};
use super::seg::{cjv, cnr, region_summary_stats, region_volumes, snr_region, snr_total, wm2max, RegionStats};
use super::{IqmVector, MetricError};
use crate::stats::SummaryStats;
use crate::volume::{center_third, Mask, Tissue, TissueMap, Volume};

/// Everything known about one stack.
#[derive(Debug, Clone, Copy)]
pub struct StackInputs<'a> {
    pub volume: &'a Volume,
    pub mask: Option<&'a Mask>,
    pub tissues: Option<&'a TissueMap>,
    pub dl: Option<&'a DlInputs>,
}

impl<'a> StackInputs<'a> {
    pub fn new(volume: &'a Volume) -> Self {
        Self { volume, mask: None, tissues: None, dl: None }
    }

    pub fn with_mask(mut self, mask: &'a Mask) -> Self {
        self.mask = Some(mask);
        self
    }

    pub fn with_tissues(mut self, tissues: &'a TissueMap) -> Self {
        self.tissues = Some(tissues);
        self
    }

    pub fn with_dl(mut self, dl: &'a DlInputs) -> Self {
        self.dl = Some(dl);
        self
    }
}

/// Non-fatal observations collected during extraction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Diagnostics {
    /// WM-to-max ratios above one (value kept).
    pub wm2max_out_of_range: usize,
    /// Voxels replaced at load time.
    pub nonfinite_voxels: usize,
    /// Entries that ended up flagged.
    pub flagged: usize,
}

/// Result of [`extract`].
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub vector: IqmVector,
    pub diagnostics: Diagnostics,
}

struct Context<'a> {
    inputs: StackInputs<'a>,
    mask: Result<&'a Mask, MetricError>,
    center_mask: Option<Mask>,
    brain_slices: Option<Vec<usize>>,
    center_slices: Option<Vec<usize>>,
    region_stats: [Option<Result<RegionStats, MetricError>>; 2],
    diagnostics: Diagnostics,
}

impl<'a> Context<'a> {
    fn new(inputs: StackInputs<'a>) -> Self {
        let mask = match inputs.mask {
            None => Err(MetricError::MissingInput("mask")),
            Some(m) if m.dims() != inputs.volume.dims() => Err(MetricError::GridMismatch),
            Some(m) => Ok(m),
        };
        Self {
            inputs,
            mask,
            center_mask: None,
            brain_slices: None,
            center_slices: None,
            region_stats: [None, None],
            diagnostics: Diagnostics { nonfinite_voxels: inputs.volume.nonfinite_replaced(), ..Default::default() },
        }
    }

    fn mask(&self) -> Result<&'a Mask, MetricError> {
        self.mask.clone()
    }

    fn center_mask(&mut self) -> Result<&Mask, MetricError> {
        let m = self.mask()?;
        Ok(self.center_mask.get_or_insert_with(|| m.restrict_to_slices(&m.center_slices())))
    }

    fn tissues(&self) -> Result<&'a TissueMap, MetricError> {
        self.inputs.tissues.ok_or(MetricError::MissingInput("labelmap"))
    }

    /// Slices holding brain: from the mask when present, else from the
    /// non-background tissue labels.
    fn brain_slices(&mut self) -> Result<&[usize], MetricError> {
        if self.brain_slices.is_none() {
            let slices = match self.mask() {
                Ok(m) => m.kept_slices(),
                Err(_) => {
                    let t = self.tissues()?;
                    let [nx, ny, nz] = t.dims();
                    let plane = nx * ny;
                    (0..nz).filter(|&z| t.data()[z * plane..(z + 1) * plane].iter().any(|&x| x != Tissue::Bg)).collect()
                }
            };
            self.brain_slices = Some(slices);
        }
        Ok(self.brain_slices.as_deref().unwrap_or_default())
    }

    fn center_slices(&mut self) -> Result<&[usize], MetricError> {
        if self.center_slices.is_none() {
            let c = center_third(self.brain_slices()?);
            self.center_slices = Some(c);
        }
        Ok(self.center_slices.as_deref().unwrap_or_default())
    }

    fn region_stats(&mut self, center_only: bool) -> Result<&RegionStats, MetricError> {
        let slot = usize::from(center_only);
        if self.region_stats[slot].is_none() {
            let r = self.compute_region_stats(center_only);
            self.region_stats[slot] = Some(r);
        }
        match self.region_stats[slot].as_ref() {
            Some(Ok(s)) => Ok(s),
            Some(Err(e)) => Err(e.clone()),
            None => unreachable!(),
        }
    }

    fn compute_region_stats(&mut self, center_only: bool) -> Result<RegionStats, MetricError> {
        let t = self.tissues()?;
        let vol = self.inputs.volume;
        if center_only {
            let c = self.center_slices()?.to_vec();
            region_summary_stats(vol, t, Some(&c))
        } else {
            region_summary_stats(vol, t, None)
        }
    }

    fn intensity_stat(&mut self, stat: IntensityStat, center_only: bool) -> Result<f64, MetricError> {
        let vol = self.inputs.volume;
        let region = if center_only { self.center_mask()? } else { self.mask()? };
        let s = summary_stats(vol, region)?;
        Ok(match stat {
            IntensityStat::Mean => s.mean,
            IntensityStat::Median => s.median,
            IntensityStat::Std => s.std,
            IntensityStat::P05 => s.p05,
            IntensityStat::P95 => s.p95,
            IntensityStat::Cov => s.cov,
            IntensityStat::Kurtosis => s.kurtosis,
        })
    }

    fn eval(&mut self, metric: &Metric) -> Result<f64, MetricError> {
        let vol = self.inputs.volume;
        let spacing = vol.spacing();
        match *metric {
            Metric::RankError(p) => {
                if p.masked {
                    rank_error(vol, self.mask()?, &p)
                } else {
                    match self.mask() {
                        Ok(m) => rank_error(vol, m, &p),
                        Err(_) => rank_error(vol, &Mask::full(vol.dims()), &p),
                    }
                }
            }
            Metric::SlicePair(p) => slice_pair_metric(vol, self.mask()?, &p),
            Metric::SummaryStat { stat, center_only } => self.intensity_stat(stat, center_only),
            Metric::Entropy { masked, bins } => {
                let region = if masked { Some(self.mask()?) } else { None };
                shannon_entropy(vol, region, bins)
            }
            Metric::Bias { selection, order } => match selection {
                Selection::Full => estimate_bias(vol, None, order),
                Selection::Masked => estimate_bias(vol, Some(self.mask()?), order),
                Selection::Center => {
                    let c = self.center_mask()?.clone();
                    estimate_bias(vol, Some(&c), order)
                }
            },
            Metric::FilterImage { kernel, masked } => {
                let region = if masked { Some(self.mask()?) } else { None };
                sharpness_filter(vol, region, kernel)
            }
            Metric::MaskVolume => Ok(mask_volume(self.mask()?, spacing)),
            Metric::Centroid { center_only } => centroid_stat(self.mask()?, spacing, center_only),
            Metric::ClosingMask { center_only, line_len } => closing_diff(self.mask()?, line_len, center_only),
            Metric::FilterMask { kernel, center_only } => mask_sharpness(self.mask()?, spacing, kernel, center_only),
            Metric::SegStat { tissue, stat, center_only } => {
                let r = *self.region_stats(center_only)?.region(tissue);
                if stat == RegionStat::N {
                    return Ok(r.n as f64);
                }
                let s: SummaryStats = r.stats.ok_or(MetricError::EmptyRegion)?;
                Ok(match stat {
                    RegionStat::Mean => s.mean,
                    RegionStat::Median => s.median,
                    RegionStat::P05 => s.p05,
                    RegionStat::P95 => s.p95,
                    RegionStat::Kurtosis => s.kurtosis,
                    RegionStat::Std => s.std,
                    RegionStat::Mad => s.mad,
                    RegionStat::N => unreachable!(),
                })
            }
            Metric::SegVolume { tissue, center_only } => {
                let t = self.tissues()?;
                if t.dims() != vol.dims() {
                    return Err(MetricError::GridMismatch);
                }
                let v = if center_only {
                    let c = self.center_slices()?.to_vec();
                    region_volumes(t, spacing, Some(&c))
                } else {
                    region_volumes(t, spacing, None)
                };
                Ok(v[tissue.index()])
            }
            Metric::Snr { tissue, center_only } => {
                let s = self.region_stats(center_only)?;
                match tissue {
                    Some(t) => snr_region(s, t),
                    None => snr_total(s),
                }
            }
            Metric::Cnr { center_only } => cnr(self.region_stats(center_only)?),
            Metric::Cjv { center_only } => cjv(self.region_stats(center_only)?),
            Metric::Wm2Max { center_only } => {
                let intensities: Vec<f64> = if center_only {
                    let c = self.center_slices()?.to_vec();
                    let plane = vol.dims()[0] * vol.dims()[1];
                    c.iter().flat_map(|&z| vol.data()[z * plane..(z + 1) * plane].iter().copied()).collect()
                } else {
                    vol.data().to_vec()
                };
                let s = self.region_stats(center_only)?;
                let r = wm2max(&intensities, s)?;
                if r.out_of_range {
                    self.diagnostics.wm2max_out_of_range += 1;
                }
                Ok(r.value)
            }
            Metric::DlSlice(variant) => {
                let dl = self.inputs.dl.ok_or(MetricError::MissingInput("dl_slice"))?;
                dl_slice_aggregate(&dl.slices, variant)
            }
            Metric::DlStack => self.inputs.dl.and_then(|d| d.stack).ok_or(MetricError::MissingInput("dl_stack")),
            Metric::ImSize(which) => Ok(match which {
                ImSize::X => spacing[0],
                ImSize::Y => spacing[1],
                ImSize::Z => spacing[2],
                ImSize::VoxelVolume => spacing[0] * spacing[1] * spacing[2],
                ImSize::PixelArea => spacing[0] * spacing[1],
            }),
        }
    }
}

/// Evaluates every catalogue entry; failures become flagged zeros.
pub fn extract(stack_id: impl Into<String>, catalogue: &IqmCatalogue, inputs: StackInputs<'_>) -> Extraction {
    let mut ctx = Context::new(inputs);
    let outcomes: Vec<Result<f64, MetricError>> = catalogue.descriptors().iter().map(|d| ctx.eval(&d.metric)).collect();
    let vector = IqmVector::from_outcomes(stack_id.into(), catalogue.names().clone(), outcomes);
    let mut diagnostics = ctx.diagnostics;
    diagnostics.flagged = vector.flags().iter().filter(|&&f| f).count();
    Extraction { vector, diagnostics }
}

/// Outcome of a single entry, for inspection and tests.
pub fn evaluate_metric(metric: &Metric, inputs: StackInputs<'_>) -> Result<f64, MetricError> {
    Context::new(inputs).eval(metric)
}
