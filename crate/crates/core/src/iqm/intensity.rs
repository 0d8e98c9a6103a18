//! Intensity-based metrics: low-rank compressibility, slice-to-slice
//! similarity, ROI statistics, entropy, bias level and sharpness.

use alloc::vec::Vec;

use super::MetricError;
use crate::linalg;
use crate::num;
use crate::stats::{self, SummaryStats};
use crate::volume::{linear_index, Mask, Volume};

/// Number of histogram bins used by the information-theoretic slice metrics
/// and by [`shannon_entropy`] in the default catalogue.
pub const HISTOGRAM_BINS: usize = 128;
/// Default neighbourhood half-width of windowed slice comparisons.
pub const DEFAULT_WINDOW: usize = 3;
/// PSNR reported when two slices are identical.
pub const PSNR_CAP_DB: f64 = 100.0;
/// Default relative residual defining the rank in [`rank_error`].
pub const RANK_THRESHOLD: f64 = 0.01;

fn check_grid(vol: &Volume, mask: &Mask) -> Result<(), MetricError> {
    mask.check_grid(vol.dims()).map_err(|_| MetricError::GridMismatch)
}

/// Masked slices cropped to the in-plane bounding box of the mask.
///
/// Row `i` is slice `kept_slices[i]` flattened; pixels outside that slice's
/// mask are zeroed when the matrix is built with `zero_outside`.
#[derive(Debug, Clone)]
pub struct SliceMatrix {
    pub rows: Vec<Vec<f64>>,
    pub row_masks: Vec<Vec<bool>>,
    pub kept_slices: Vec<usize>,
    pub width: usize,
    pub height: usize,
}

impl SliceMatrix {
    /// Builds the matrix over `slices` (each must contain mask voxels).
    pub fn build(vol: &Volume, mask: &Mask, slices: &[usize], zero_outside: bool) -> Result<Self, MetricError> {
        check_grid(vol, mask)?;
        let sub = mask.restrict_to_slices(slices);
        let (x0, x1, y0, y1) = sub.inplane_bbox().ok_or(MetricError::EmptyMask)?;
        let (width, height) = (x1 - x0, y1 - y0);
        let mut rows = Vec::with_capacity(slices.len());
        let mut row_masks = Vec::with_capacity(slices.len());
        let mut kept = Vec::with_capacity(slices.len());
        for &z in slices {
            let mut row = Vec::with_capacity(width * height);
            let mut rm = Vec::with_capacity(width * height);
            let mut any = false;
            for y in y0..y1 {
                for x in x0..x1 {
                    let inside = mask.get(x, y, z);
                    any |= inside;
                    let v = vol.get(x, y, z);
                    row.push(if inside || !zero_outside { v } else { 0.0 });
                    rm.push(inside);
                }
            }
            if any {
                rows.push(row);
                row_masks.push(rm);
                kept.push(z);
            }
        }
        Ok(Self { rows, row_masks, kept_slices: kept, width, height })
    }

    pub fn n_slices(&self) -> usize {
        self.rows.len()
    }

    /// Squared singular values, decreasing, from the eigenvalues of `M Mᵀ`.
    pub fn squared_singular_values(&self) -> Vec<f64> {
        let n = self.rows.len();
        let mut gram = alloc::vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let d: f64 = self.rows[i].iter().zip(&self.rows[j]).map(|(a, b)| a * b).sum();
                gram[i * n + j] = d;
                gram[j * n + i] = d;
            }
        }
        linalg::symmetric_eigenvalues(gram, n).into_iter().map(|v| v.max(0.0)).collect()
    }
}

/// Options of [`rank_error`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankErrorParams {
    /// Restrict to the central third of the kept slices.
    pub center_only: bool,
    /// Divide the score by the mask volume in cm³.
    pub relative: bool,
    /// Zero out maternal tissue (pixels outside the mask) before the SVD.
    pub masked: bool,
    /// Relative residual that defines the effective rank.
    pub threshold: f64,
}

impl Default for RankErrorParams {
    fn default() -> Self {
        Self { center_only: false, relative: false, masked: true, threshold: RANK_THRESHOLD }
    }
}

/// Smallest rank `r` whose truncation residual `sqrt(Σ_{j>r} σⱼ²) / sqrt(Σ σⱼ²)`
/// is at most `threshold`, given squared singular values in decreasing order.
pub fn effective_rank(sq_singular: &[f64], threshold: f64) -> Option<usize> {
    let total: f64 = sq_singular.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let mut tail = total;
    for (r, s) in sq_singular.iter().enumerate() {
        tail -= s;
        if num::sqrt(tail.max(0.0) / total) <= threshold {
            return Some(r + 1);
        }
    }
    Some(sq_singular.len())
}

/// Compressibility of the stack: effective rank of the slice matrix divided by
/// the number of slices (in `(0, 1]`), optionally per cm³ of brain.
pub fn rank_error(vol: &Volume, mask: &Mask, params: &RankErrorParams) -> Result<f64, MetricError> {
    check_grid(vol, mask)?;
    let slices = if params.center_only { mask.center_slices() } else { mask.kept_slices() };
    if slices.len() < 2 {
        return Err(MetricError::TooFewSlices { needed: 2, found: slices.len() });
    }
    let m = SliceMatrix::build(vol, mask, &slices, params.masked)?;
    let n = m.n_slices();
    let rank = effective_rank(&m.squared_singular_values(), params.threshold).ok_or(MetricError::ZeroEnergy)?;
    let mut score = rank as f64 / n as f64;
    if params.relative {
        let sp = vol.spacing();
        let cm3 = mask.restrict_to_slices(&slices).count() as f64 * sp[0] * sp[1] * sp[2] / 1000.0;
        score /= cm3;
    }
    Ok(score)
}

/// Slice-to-slice comparison functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SliceMetricKind {
    Mae,
    NMae,
    Rmse,
    NRmse,
    Ncc,
    Psnr,
    Ssim,
    Mi,
    NMi,
    JointEntropy,
}

impl SliceMetricKind {
    pub const ALL: [SliceMetricKind; 10] = [
        SliceMetricKind::Mae,
        SliceMetricKind::NMae,
        SliceMetricKind::Rmse,
        SliceMetricKind::NRmse,
        SliceMetricKind::Ncc,
        SliceMetricKind::Psnr,
        SliceMetricKind::Ssim,
        SliceMetricKind::Mi,
        SliceMetricKind::NMi,
        SliceMetricKind::JointEntropy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SliceMetricKind::Mae => "MAE",
            SliceMetricKind::NMae => "nMAE",
            SliceMetricKind::Rmse => "RMSE",
            SliceMetricKind::NRmse => "nRMSE",
            SliceMetricKind::Ncc => "NCC",
            SliceMetricKind::Psnr => "PSNR",
            SliceMetricKind::Ssim => "SSIM",
            SliceMetricKind::Mi => "MI",
            SliceMetricKind::NMi => "nMI",
            SliceMetricKind::JointEntropy => "joint_entropy",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    fn uses_histogram(self) -> bool {
        matches!(self, SliceMetricKind::Mi | SliceMetricKind::NMi | SliceMetricKind::JointEntropy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pairing {
    AllPairs,
    /// Pairs whose slice indices differ by at most `k`.
    Window(usize),
}

/// Which pixels of a slice pair are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MaskCombine {
    /// Whole bounding-box crop.
    None,
    Union,
    Intersection,
}

impl MaskCombine {
    pub fn name(self) -> &'static str {
        match self {
            MaskCombine::None => "none",
            MaskCombine::Union => "union",
            MaskCombine::Intersection => "intersection",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SlicePairParams {
    pub kind: SliceMetricKind,
    pub pairing: Pairing,
    pub combine: MaskCombine,
}

/// Reusable joint-histogram buffer.
#[derive(Debug, Clone)]
pub struct JointHistogram {
    pub bins: usize,
    pub counts: Vec<u64>,
    pub range: (f64, f64),
}

impl JointHistogram {
    pub fn new(bins: usize) -> Self {
        Self { bins, counts: alloc::vec![0; bins * bins], range: (0.0, 0.0) }
    }

    /// Fills the histogram from paired samples over their shared range.
    pub fn fill(&mut self, a: &[f64], b: &[f64]) {
        self.counts.iter_mut().for_each(|c| *c = 0);
        let (lo, hi) = a.iter().chain(b).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        self.range = (lo, hi);
        for (&x, &y) in a.iter().zip(b) {
            let i = stats::bin_index(x, lo, hi, self.bins);
            let j = stats::bin_index(y, lo, hi, self.bins);
            self.counts[i * self.bins + j] += 1;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn marginal_x(&self) -> Vec<u64> {
        self.counts.chunks(self.bins).map(|row| row.iter().sum()).collect()
    }

    pub fn marginal_y(&self) -> Vec<u64> {
        let mut m = alloc::vec![0u64; self.bins];
        for row in self.counts.chunks(self.bins) {
            for (acc, c) in m.iter_mut().zip(row) {
                *acc += c;
            }
        }
        m
    }

    /// `(H(X), H(Y), H(X,Y))` in bits.
    pub fn entropies(&self) -> (f64, f64, f64) {
        (
            stats::entropy_bits(&self.marginal_x()),
            stats::entropy_bits(&self.marginal_y()),
            stats::entropy_bits(&self.counts),
        )
    }
}

/// Metric between two equally long pixel vectors; `None` marks a degenerate
/// pair that is skipped.
pub fn pair_metric(kind: SliceMetricKind, a: &[f64], b: &[f64], hist: &mut JointHistogram) -> Option<f64> {
    let n = a.len();
    if n == 0 {
        return None;
    }
    let nf = n as f64;
    if kind.uses_histogram() {
        hist.fill(a, b);
        let (hx, hy, hxy) = hist.entropies();
        return match kind {
            SliceMetricKind::Mi => Some((hx + hy - hxy).max(0.0)),
            SliceMetricKind::NMi => (hxy > 0.0).then(|| (hx + hy) / hxy),
            _ => Some(hxy),
        };
    }
    let (lo, hi) = a.iter().chain(b).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    let mse = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / nf;
    match kind {
        SliceMetricKind::Mae => Some(a.iter().zip(b).map(|(x, y)| num::abs(x - y)).sum::<f64>() / nf),
        SliceMetricKind::NMae => {
            let mae = a.iter().zip(b).map(|(x, y)| num::abs(x - y)).sum::<f64>() / nf;
            let scale = a.iter().zip(b).map(|(x, y)| (num::abs(*x) + num::abs(*y)) / 2.0).sum::<f64>() / nf;
            (scale > 0.0).then(|| mae / scale)
        }
        SliceMetricKind::Rmse => Some(num::sqrt(mse)),
        SliceMetricKind::NRmse => (range > 0.0).then(|| num::sqrt(mse) / range),
        SliceMetricKind::Psnr => {
            if mse == 0.0 {
                Some(PSNR_CAP_DB)
            } else {
                Some((10.0 * num::log10(range * range / mse)).min(PSNR_CAP_DB))
            }
        }
        SliceMetricKind::Ncc => stats::pearson(a, b),
        SliceMetricKind::Ssim => {
            let ma = stats::mean(a);
            let mb = stats::mean(b);
            let va = stats::variance(a);
            let vb = stats::variance(b);
            if va <= 0.0 || vb <= 0.0 {
                return None;
            }
            let cov = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / nf;
            let c1 = (0.01 * range) * (0.01 * range);
            let c2 = (0.03 * range) * (0.03 * range);
            Some(((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2)))
        }
        _ => unreachable!(),
    }
}

/// Slice index pairs `(i, j)`, `i < j`, as positions into `kept`.
pub fn slice_pairs(kept: &[usize], pairing: Pairing) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..kept.len() {
        for j in (i + 1)..kept.len() {
            match pairing {
                Pairing::AllPairs => out.push((i, j)),
                Pairing::Window(k) => {
                    if kept[j] - kept[i] <= k {
                        out.push((i, j));
                    }
                }
            }
        }
    }
    out
}

fn select_pair(m: &SliceMatrix, i: usize, j: usize, combine: MaskCombine, a: &mut Vec<f64>, b: &mut Vec<f64>) {
    a.clear();
    b.clear();
    let (ri, rj) = (&m.rows[i], &m.rows[j]);
    let (mi, mj) = (&m.row_masks[i], &m.row_masks[j]);
    for p in 0..ri.len() {
        let keep = match combine {
            MaskCombine::None => true,
            MaskCombine::Union => mi[p] || mj[p],
            MaskCombine::Intersection => mi[p] && mj[p],
        };
        if keep {
            a.push(ri[p]);
            b.push(rj[p]);
        }
    }
}

/// Mean of a pairwise slice metric over eligible slice pairs of the masked
/// stack.
pub fn slice_pair_metric(vol: &Volume, mask: &Mask, params: &SlicePairParams) -> Result<f64, MetricError> {
    let values = slice_pair_values(vol, mask, params)?;
    Ok(stats::mean(&values))
}

/// Per-pair values (degenerate pairs omitted) backing [`slice_pair_metric`].
pub fn slice_pair_values(vol: &Volume, mask: &Mask, params: &SlicePairParams) -> Result<Vec<f64>, MetricError> {
    check_grid(vol, mask)?;
    if let Pairing::Window(0) = params.pairing {
        return Err(MetricError::Undefined);
    }
    let kept = mask.kept_slices();
    if kept.len() < 2 {
        return Err(MetricError::TooFewSlices { needed: 2, found: kept.len() });
    }
    let m = SliceMatrix::build(vol, mask, &kept, true)?;
    let mut hist = JointHistogram::new(HISTOGRAM_BINS);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    let mut values = Vec::new();
    for (i, j) in slice_pairs(&m.kept_slices, params.pairing) {
        select_pair(&m, i, j, params.combine, &mut a, &mut b);
        if a.is_empty() {
            continue;
        }
        if let Some(v) = pair_metric(params.kind, &a, &b, &mut hist) {
            values.push(v);
        }
    }
    if values.is_empty() {
        return Err(MetricError::DegeneratePair);
    }
    Ok(values)
}

fn region_values(vol: &Volume, region: Option<&Mask>) -> Result<Vec<f64>, MetricError> {
    match region {
        None => Ok(vol.data().to_vec()),
        Some(m) => {
            check_grid(vol, m)?;
            Ok(vol.data().iter().zip(m.data()).filter(|(_, &b)| b).map(|(&v, _)| v).collect())
        }
    }
}

/// Statistics of the intensities inside `region`.
pub fn summary_stats(vol: &Volume, region: &Mask) -> Result<SummaryStats, MetricError> {
    let values = region_values(vol, Some(region))?;
    SummaryStats::from_values(&values).ok_or(MetricError::EmptyRegion)
}

/// Entropy in bits of the intensity histogram (`bins` equal-width bins over
/// `[min, max]` of the selected voxels).
pub fn shannon_entropy(vol: &Volume, region: Option<&Mask>, bins: usize) -> Result<f64, MetricError> {
    let values = region_values(vol, region)?;
    if values.is_empty() || bins == 0 {
        return Err(MetricError::EmptyRegion);
    }
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let mut counts = alloc::vec![0u64; bins];
    for v in &values {
        counts[stats::bin_index(*v, lo, hi, bins)] += 1;
    }
    Ok(stats::entropy_bits(&counts))
}

fn normalized_coord(i: usize, n: usize) -> f64 {
    if n <= 1 {
        0.0
    } else {
        2.0 * i as f64 / (n - 1) as f64 - 1.0
    }
}

/// Exponent triples `(i, j, k)` with `i + j + k <= order` and each exponent
/// bounded by the per-axis cap.
fn polynomial_terms(order: usize, caps: [usize; 3]) -> Vec<[usize; 3]> {
    let mut terms = Vec::new();
    for total in 0..=order {
        for i in 0..=total.min(caps[0]) {
            for j in 0..=(total - i).min(caps[1]) {
                let k = total - i - j;
                if k <= caps[2] {
                    terms.push([i, j, k]);
                }
            }
        }
    }
    terms
}

/// Level of smooth multiplicative bias.
///
/// Fits a polynomial of total degree `order` in normalized voxel coordinates
/// to the log-intensities of the selected voxels and returns the coefficient
/// of variation of the fitted field `exp(fit)`. The degree along an axis never
/// exceeds the number of distinct selected coordinates on that axis minus one,
/// so thin stacks are fitted with a reduced basis instead of failing.
pub fn estimate_bias(vol: &Volume, region: Option<&Mask>, order: usize) -> Result<f64, MetricError> {
    let dims = vol.dims();
    let mut voxels: Vec<(usize, usize, usize)> = Vec::new();
    if let Some(m) = region {
        check_grid(vol, m)?;
    }
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                if region.is_none_or(|m| m.get(x, y, z)) {
                    voxels.push((x, y, z));
                }
            }
        }
    }
    if voxels.is_empty() {
        return Err(MetricError::EmptyRegion);
    }
    let mut distinct = [alloc::vec![false; dims[0]], alloc::vec![false; dims[1]], alloc::vec![false; dims[2]]];
    for &(x, y, z) in &voxels {
        distinct[0][x] = true;
        distinct[1][y] = true;
        distinct[2][z] = true;
    }
    let caps = [0, 1, 2].map(|a| distinct[a].iter().filter(|&&b| b).count().saturating_sub(1));
    let terms = polynomial_terms(order, caps);
    let m = terms.len();
    if voxels.len() < m {
        return Err(MetricError::SingularFit);
    }
    let min = voxels.iter().map(|&(x, y, z)| vol.get(x, y, z)).fold(f64::INFINITY, f64::min);
    let shift = if min <= 0.0 { 1.0 - min } else { 0.0 };

    let powers = |c: f64| -> [f64; 8] {
        let mut p = [1.0; 8];
        for e in 1..8 {
            p[e] = p[e - 1] * c;
        }
        p
    };
    let basis = |x: usize, y: usize, z: usize, row: &mut Vec<f64>| {
        let px = powers(normalized_coord(x, dims[0]));
        let py = powers(normalized_coord(y, dims[1]));
        let pz = powers(normalized_coord(z, dims[2]));
        row.clear();
        for t in &terms {
            row.push(px[t[0].min(7)] * py[t[1].min(7)] * pz[t[2].min(7)]);
        }
    };
    if order > 7 {
        return Err(MetricError::Undefined);
    }

    let mut ata = alloc::vec![0.0; m * m];
    let mut aty = alloc::vec![0.0; m];
    let mut row = Vec::with_capacity(m);
    let mut logs = Vec::with_capacity(voxels.len());
    for &(x, y, z) in &voxels {
        let l = num::ln(vol.get(x, y, z) + shift);
        logs.push(l);
        basis(x, y, z, &mut row);
        for i in 0..m {
            aty[i] += row[i] * l;
            for j in i..m {
                ata[i * m + j] += row[i] * row[j];
            }
        }
    }
    for i in 0..m {
        for j in 0..i {
            ata[i * m + j] = ata[j * m + i];
        }
    }
    let coef = linalg::cholesky_solve(&ata, &aty, m, 1e-12).ok_or(MetricError::SingularFit)?;
    let mut field = Vec::with_capacity(voxels.len());
    for &(x, y, z) in &voxels {
        basis(x, y, z, &mut row);
        let fit: f64 = row.iter().zip(&coef).map(|(a, c)| a * c).sum();
        field.push(num::exp(fit));
    }
    let mean = stats::mean(&field);
    Ok(stats::std_dev(&field) / mean)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterKernel {
    Laplace,
    Sobel,
}

impl FilterKernel {
    pub fn name(self) -> &'static str {
        match self {
            FilterKernel::Laplace => "Laplace",
            FilterKernel::Sobel => "sobel",
        }
    }
}

const SMOOTH: [f64; 3] = [1.0, 2.0, 1.0];

/// 6-neighbour Laplacian per mm² at an interior voxel of a field.
pub(crate) fn laplacian_at(get: &impl Fn(usize, usize, usize) -> f64, sp: [f64; 3], x: usize, y: usize, z: usize) -> f64 {
    let c = get(x, y, z);
    (get(x + 1, y, z) - 2.0 * c + get(x - 1, y, z)) / (sp[0] * sp[0])
        + (get(x, y + 1, z) - 2.0 * c + get(x, y - 1, z)) / (sp[1] * sp[1])
        + (get(x, y, z + 1) - 2.0 * c + get(x, y, z - 1)) / (sp[2] * sp[2])
}

/// 3D Sobel differences `[-1, 0, 1]` smoothed by `[1, 2, 1] ⊗ [1, 2, 1] / 16`
/// along the other two axes. Not divided by spacing.
pub(crate) fn sobel_raw_at(get: &impl Fn(usize, usize, usize) -> f64, x: usize, y: usize, z: usize) -> [f64; 3] {
    let mut g = [0.0; 3];
    for a in 0..3 {
        for b in 0..3 {
            let w = SMOOTH[a] * SMOOTH[b] / 16.0;
            let (da, db) = (a as isize - 1, b as isize - 1);
            let off = |v: usize, d: isize| (v as isize + d) as usize;
            g[0] += w * (get(x + 1, off(y, da), off(z, db)) - get(x - 1, off(y, da), off(z, db)));
            g[1] += w * (get(off(x, da), y + 1, off(z, db)) - get(off(x, da), y - 1, off(z, db)));
            g[2] += w * (get(off(x, da), off(y, db), z + 1) - get(off(x, da), off(y, db), z - 1));
        }
    }
    g
}

/// Iterates interior voxels (every 26-neighbour inside the grid).
pub(crate) fn interior(dims: [usize; 3]) -> impl Iterator<Item = (usize, usize, usize)> {
    let [nx, ny, nz] = dims;
    (1..nz.saturating_sub(1)).flat_map(move |z| (1..ny.saturating_sub(1)).flat_map(move |y| (1..nx.saturating_sub(1)).map(move |x| (x, y, z))))
}

/// Image sharpness: variance of the Laplacian response, or mean Sobel
/// gradient magnitude (per mm), over the selected interior voxels.
pub fn sharpness_filter(vol: &Volume, region: Option<&Mask>, kernel: FilterKernel) -> Result<f64, MetricError> {
    let dims = vol.dims();
    if dims.iter().any(|&d| d < 3) {
        return Err(MetricError::GridTooSmall(dims));
    }
    if let Some(m) = region {
        check_grid(vol, m)?;
    }
    let sp = vol.spacing();
    let data = vol.data();
    let get = |x: usize, y: usize, z: usize| data[linear_index(dims, x, y, z)];
    let mut responses = Vec::new();
    for (x, y, z) in interior(dims) {
        if region.is_none_or(|m| m.get(x, y, z)) {
            let r = match kernel {
                FilterKernel::Laplace => laplacian_at(&get, sp, x, y, z),
                FilterKernel::Sobel => {
                    let g = sobel_raw_at(&get, x, y, z);
                    let (gx, gy, gz) = (g[0] / (2.0 * sp[0]), g[1] / (2.0 * sp[1]), g[2] / (2.0 * sp[2]));
                    num::sqrt(gx * gx + gy * gy + gz * gz)
                }
            };
            responses.push(r);
        }
    }
    if responses.is_empty() {
        return Err(MetricError::EmptyRegion);
    }
    Ok(match kernel {
        FilterKernel::Laplace => stats::variance(&responses),
        FilterKernel::Sobel => stats::mean(&responses),
    })
}
