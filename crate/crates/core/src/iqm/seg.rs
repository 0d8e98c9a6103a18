//! Segmentation-based metrics over merged BG/CSF/GM/WM regions.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::MetricError;
use crate::num;
use crate::stats::{self, SummaryStats};
use crate::volume::{LabelMap, Tissue, TissueMap, Volume};

/// Label → tissue merge table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMerge {
    groups: BTreeMap<u32, Tissue>,
}

impl LabelMerge {
    pub fn new(groups: BTreeMap<u32, Tissue>) -> Self {
        Self { groups }
    }

    /// Eight-class fetal scheme: 1 external CSF, 2 cortical GM, 3 WM,
    /// 4 ventricles, 5 cerebellum, 6 deep GM, 7 brainstem, 8 corpus callosum.
    /// The corpus callosum is sent to BG so that WM excludes it.
    pub fn fetal_default() -> Self {
        let pairs = [
            (1, Tissue::Csf),
            (2, Tissue::Gm),
            (3, Tissue::Wm),
            (4, Tissue::Csf),
            (5, Tissue::Gm),
            (6, Tissue::Gm),
            (7, Tissue::Wm),
            (8, Tissue::Bg),
        ];
        Self { groups: pairs.into_iter().collect() }
    }

    pub fn get(&self, label: u32) -> Option<Tissue> {
        self.groups.get(&label).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, Tissue)> + '_ {
        self.groups.iter().map(|(&l, &t)| (l, t))
    }
}

/// Relabels a segmentation into tissue groups. Label 0 is always BG.
pub fn merge_labels(seg: &LabelMap, mapping: &LabelMerge) -> Result<TissueMap, MetricError> {
    let mut out = Vec::with_capacity(seg.data().len());
    for &l in seg.data() {
        let t = if l == 0 {
            mapping.get(0).unwrap_or(Tissue::Bg)
        } else {
            mapping.get(l).ok_or(MetricError::UnmappedLabel(l))?
        };
        out.push(t);
    }
    Ok(TissueMap::new(seg.dims(), out).expect("same grid"))
}

/// Summary of one tissue region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub stats: Option<SummaryStats>,
    pub n: usize,
    pub volume_mm3: f64,
}

impl Region {
    pub fn mean(&self) -> Option<f64> {
        self.stats.map(|s| s.mean)
    }

    pub fn std(&self) -> Option<f64> {
        self.stats.map(|s| s.std)
    }
}

/// Per-tissue statistics, indexed by [`Tissue::index`].
#[derive(Debug, Clone, PartialEq)]
pub struct RegionStats {
    pub regions: [Region; 4],
}

impl RegionStats {
    pub fn region(&self, t: Tissue) -> &Region {
        &self.regions[t.index()]
    }

    fn mean_std(&self, t: Tissue) -> Result<(f64, f64), MetricError> {
        let r = self.region(t);
        match r.stats {
            Some(s) => Ok((s.mean, s.std)),
            None => Err(MetricError::EmptyRegion),
        }
    }
}

/// Statistics per merged region, optionally restricted to a slice list.
pub fn region_summary_stats(vol: &Volume, seg: &TissueMap, slices: Option<&[usize]>) -> Result<RegionStats, MetricError> {
    if seg.dims() != vol.dims() {
        return Err(MetricError::GridMismatch);
    }
    let mut keep = alloc::vec![slices.is_none(); vol.dims()[2]];
    if let Some(s) = slices {
        for &z in s {
            keep[z] = true;
        }
    }
    let plane = vol.dims()[0] * vol.dims()[1];
    let mut buckets: [Vec<f64>; 4] = Default::default();
    for (i, (&v, &t)) in vol.data().iter().zip(seg.data()).enumerate() {
        if keep[i / plane] {
            buckets[t.index()].push(v);
        }
    }
    let sp = vol.spacing();
    let voxel = sp[0] * sp[1] * sp[2];
    let regions = buckets.map(|b| Region {
        stats: SummaryStats::from_values(&b),
        n: b.len(),
        volume_mm3: b.len() as f64 * voxel,
    });
    Ok(RegionStats { regions })
}

/// Region volumes in mm³, indexed by [`Tissue::index`].
pub fn region_volumes(seg: &TissueMap, spacing: [f64; 3], slices: Option<&[usize]>) -> [f64; 4] {
    let voxel = spacing[0] * spacing[1] * spacing[2];
    let plane = seg.dims()[0] * seg.dims()[1];
    let mut keep = alloc::vec![slices.is_none(); seg.dims()[2]];
    if let Some(s) = slices {
        for &z in s {
            keep[z] = true;
        }
    }
    let mut counts = [0usize; 4];
    for (i, t) in seg.data().iter().enumerate() {
        if keep[i / plane] {
            counts[t.index()] += 1;
        }
    }
    counts.map(|c| c as f64 * voxel)
}

/// Within-region SNR, `μ / (σ · sqrt(n / (n - 1)))`.
pub fn snr_region(stats: &RegionStats, region: Tissue) -> Result<f64, MetricError> {
    let r = stats.region(region);
    let s = r.stats.ok_or(MetricError::EmptyRegion)?;
    if r.n < 2 || s.std <= 0.0 {
        return Err(MetricError::ZeroVariance);
    }
    let n = r.n as f64;
    Ok(s.mean / (s.std * num::sqrt(n / (n - 1.0))))
}

/// Mean of the defined per-region SNRs.
pub fn snr_total(stats: &RegionStats) -> Result<f64, MetricError> {
    let defined: Vec<f64> = Tissue::ALL.iter().filter_map(|&t| snr_region(stats, t).ok()).collect();
    if defined.is_empty() {
        return Err(MetricError::ZeroVariance);
    }
    Ok(stats::mean(&defined))
}

/// Contrast-to-noise ratio between WM and GM, with the background (maternal
/// tissue) as noise reference.
pub fn cnr(stats: &RegionStats) -> Result<f64, MetricError> {
    let (mw, sw) = stats.mean_std(Tissue::Wm)?;
    let (mg, sg) = stats.mean_std(Tissue::Gm)?;
    let (_, sb) = stats.mean_std(Tissue::Bg)?;
    let denom = num::sqrt(sb * sb + sw * sw + sg * sg);
    if denom == 0.0 {
        return Err(MetricError::AllZeroStd);
    }
    Ok(num::abs(mw - mg) / denom)
}

/// Coefficient of joint variation of WM and GM.
pub fn cjv(stats: &RegionStats) -> Result<f64, MetricError> {
    let (mw, sw) = stats.mean_std(Tissue::Wm)?;
    let (mg, sg) = stats.mean_std(Tissue::Gm)?;
    if mw == mg {
        return Err(MetricError::EqualMeans);
    }
    Ok((sw + sg) / num::abs(mw - mg))
}

/// Result of [`wm2max`]; `out_of_range` records ratios above one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wm2Max {
    pub value: f64,
    pub out_of_range: bool,
}

/// WM mean over the 99.95th intensity percentile of `intensities`.
pub fn wm2max(intensities: &[f64], stats: &RegionStats) -> Result<Wm2Max, MetricError> {
    let (mw, _) = stats.mean_std(Tissue::Wm)?;
    let s = stats::sorted(intensities);
    if s.is_empty() || s[0] == s[s.len() - 1] {
        return Err(MetricError::ConstantImage);
    }
    let p = stats::percentile_sorted(&s, 99.95);
    if p == 0.0 {
        return Err(MetricError::ConstantImage);
    }
    let value = mw / p;
    Ok(Wm2Max { value, out_of_range: !(0.0..=1.0).contains(&value) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats_from(regions: [(f64, f64, usize); 4]) -> RegionStats {
        RegionStats {
            regions: regions.map(|(m, s, n)| Region {
                stats: Some(SummaryStats { mean: m, median: m, std: s, p05: m, p95: m, cov: 0.0, kurtosis: 0.0, mad: 0.0, n }),
                n,
                volume_mm3: n as f64,
            }),
        }
    }

    #[test]
    fn merge_eight_labels() {
        let seg = LabelMap::new([9, 1, 1], (0..9).collect()).unwrap();
        let merged = merge_labels(&seg, &LabelMerge::fetal_default()).unwrap();
        assert_eq!(merged.data()[3], Tissue::Wm);
        assert_eq!(merged.data()[8], Tissue::Bg);
        let nine = LabelMap::new([2, 1, 1], alloc::vec![0, 9]).unwrap();
        assert_eq!(merge_labels(&nine, &LabelMerge::fetal_default()), Err(MetricError::UnmappedLabel(9)));
        let zeros = LabelMap::new([2, 2, 1], alloc::vec![0; 4]).unwrap();
        assert!(merge_labels(&zeros, &LabelMerge::fetal_default()).unwrap().data().iter().all(|&t| t == Tissue::Bg));
    }

    #[test]
    fn snr_hand_values() {
        let s = stats_from([(1.0, 1.0, 10), (1.0, 1.0, 10), (1.0, 1.0, 10), (100.0, 10.0, 2)]);
        assert!((snr_region(&s, Tissue::Wm).unwrap() - 100.0 / (10.0 * 2f64.sqrt())).abs() < 1e-12);
        let big = stats_from([(1.0, 1.0, 10), (1.0, 1.0, 10), (1.0, 1.0, 10), (100.0, 10.0, 1_000_000)]);
        assert!((snr_region(&big, Tissue::Wm).unwrap() - 10.0).abs() < 1e-4);
        let flat = stats_from([(1.0, 1.0, 10), (1.0, 1.0, 10), (1.0, 1.0, 10), (100.0, 0.0, 50)]);
        assert_eq!(snr_region(&flat, Tissue::Wm), Err(MetricError::ZeroVariance));
    }

    #[test]
    fn cnr_and_cjv_hand_values() {
        let s = stats_from([(0.0, 10.0, 5), (0.0, 1.0, 5), (90.0, 10.0, 5), (120.0, 10.0, 5)]);
        assert!((cnr(&s).unwrap() - 30.0 / 300f64.sqrt()).abs() < 1e-12);
        let s = stats_from([(0.0, 10.0, 5), (0.0, 1.0, 5), (80.0, 10.0, 5), (100.0, 10.0, 5)]);
        assert!((cjv(&s).unwrap() - 1.0).abs() < 1e-12);
        let eq = stats_from([(0.0, 10.0, 5), (0.0, 1.0, 5), (80.0, 10.0, 5), (80.0, 10.0, 5)]);
        assert_eq!(cnr(&eq).unwrap(), 0.0);
        assert_eq!(cjv(&eq), Err(MetricError::EqualMeans));
        let quiet = stats_from([(0.0, 0.0, 5), (0.0, 0.0, 5), (80.0, 0.0, 5), (100.0, 0.0, 5)]);
        assert_eq!(cjv(&quiet).unwrap(), 0.0);
        assert_eq!(cnr(&quiet), Err(MetricError::AllZeroStd));
    }

    #[test]
    fn wm2max_hand_values() {
        let s = stats_from([(0.0, 1.0, 5), (0.0, 1.0, 5), (0.0, 1.0, 5), (100.0, 1.0, 5)]);
        let img: Vec<f64> = (0..2001).map(|i| if i == 0 { 0.0 } else { 200.0 }).collect();
        assert!((wm2max(&img, &s).unwrap().value - 0.5).abs() < 1e-12);
        assert_eq!(wm2max(&[3.0; 10], &s), Err(MetricError::ConstantImage));
    }
}
