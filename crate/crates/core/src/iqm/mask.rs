//! Shape metrics computed on the brain mask alone.

use alloc::vec::Vec;

use super::intensity::{interior, laplacian_at, sobel_raw_at, FilterKernel};
use super::MetricError;
use crate::num;
use crate::stats;
use crate::volume::{center_third, linear_index, Mask};

/// Default length of the through-plane structuring element of [`closing_diff`].
pub const DEFAULT_CLOSING_LENGTH: usize = 5;

/// Brain volume in mm³.
pub fn mask_volume(mask: &Mask, spacing: [f64; 3]) -> f64 {
    mask.count() as f64 * spacing[0] * spacing[1] * spacing[2]
}

/// In-plane center of mass (mm) of every slice holding mask voxels.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceCentroids {
    pub kept_slices: Vec<usize>,
    pub centroids: Vec<(f64, f64)>,
}

impl SliceCentroids {
    pub fn compute(mask: &Mask, spacing: [f64; 3], slices: &[usize]) -> Self {
        let [nx, ny, _] = mask.dims();
        let mut kept = Vec::new();
        let mut centroids = Vec::new();
        for &z in slices {
            let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
            for y in 0..ny {
                for x in 0..nx {
                    if mask.get(x, y, z) {
                        sx += x as f64;
                        sy += y as f64;
                        n += 1;
                    }
                }
            }
            if n > 0 {
                kept.push(z);
                centroids.push((sx / n as f64 * spacing[0], sy / n as f64 * spacing[1]));
            }
        }
        Self { kept_slices: kept, centroids }
    }
}

/// Spread of the slice centroids: `var(x) + var(y)` in mm² (population
/// variance over kept slices).
pub fn centroid_stat(mask: &Mask, spacing: [f64; 3], center_only: bool) -> Result<f64, MetricError> {
    let slices = if center_only { mask.center_slices() } else { mask.kept_slices() };
    let c = SliceCentroids::compute(mask, spacing, &slices);
    if c.centroids.len() < 2 {
        return Err(MetricError::TooFewSlices { needed: 2, found: c.centroids.len() });
    }
    let xs: Vec<f64> = c.centroids.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = c.centroids.iter().map(|p| p.1).collect();
    Ok(stats::variance(&xs) + stats::variance(&ys))
}

/// Binary closing along the through-plane axis with a centred line of
/// `line_len` voxels, computed as on an unbounded zero-padded grid. The result
/// is extensive and leaves z-convex columns unchanged.
pub fn close_through_plane(mask: &Mask, line_len: usize) -> Mask {
    let dims = mask.dims();
    let [nx, ny, nz] = dims;
    let half = line_len / 2;
    let padded = nz + 2 * half;
    let mut out = alloc::vec![false; mask.data().len()];
    let mut dilated = alloc::vec![false; padded];
    for y in 0..ny {
        for x in 0..nx {
            for (p, d) in dilated.iter_mut().enumerate() {
                let lo = p.saturating_sub(2 * half);
                let hi = p.min(nz - 1);
                *d = (lo..=hi).any(|z| mask.get(x, y, z));
            }
            for z in 0..nz {
                out[linear_index(dims, x, y, z)] = dilated[z..=z + 2 * half].iter().all(|&d| d);
            }
        }
    }
    Mask::new(dims, out).expect("same grid")
}

/// Fraction of voxels added by a through-plane closing, `|closed \ mask| / |mask|`.
///
/// The closing runs over the slice range spanned by the mask; `center_only`
/// restricts the counts to the central third of that range.
pub fn closing_diff(mask: &Mask, line_len: usize, center_only: bool) -> Result<f64, MetricError> {
    if mask.is_empty() {
        return Err(MetricError::EmptyMask);
    }
    let kept = mask.kept_slices();
    let (z0, z1) = (kept[0], kept[kept.len() - 1] + 1);
    if z1 - z0 < line_len {
        return Err(MetricError::TooFewSlices { needed: line_len, found: z1 - z0 });
    }
    let sub = mask.crop_slices(z0, z1);
    let closed = close_through_plane(&sub, line_len);
    let plane = mask.dims()[0] * mask.dims()[1];
    let range: Vec<usize> = (z0..z1).collect();
    let counted = if center_only { center_third(&range) } else { range };
    let (mut original, mut added) = (0usize, 0usize);
    for z in counted {
        let r = (z - z0) * plane..(z - z0 + 1) * plane;
        for (&c, &o) in closed.data()[r.clone()].iter().zip(&sub.data()[r]) {
            original += usize::from(o);
            added += usize::from(c && !o);
        }
    }
    Ok(added as f64 / original as f64)
}

/// Mean response of an edge filter on the mask, evaluated over the voxels
/// adjacent to the mask surface (interior voxels whose 6-neighbourhood holds
/// both inside and outside voxels).
///
/// The Laplacian is the 6-neighbour stencil per mm² (absolute value); the
/// Sobel gradient uses the classic unnormalised `[-1, 0, 1]` difference with
/// `[1, 2, 1] / 4` smoothing, per mm, so a step of height one reads `1 / spacing`.
pub fn mask_sharpness(mask: &Mask, spacing: [f64; 3], kernel: FilterKernel, center_only: bool) -> Result<f64, MetricError> {
    let dims = mask.dims();
    if dims.iter().any(|&d| d < 3) {
        return Err(MetricError::GridTooSmall(dims));
    }
    if mask.is_empty() {
        return Err(MetricError::EmptyMask);
    }
    let mut keep_slice = alloc::vec![true; dims[2]];
    if center_only {
        keep_slice = alloc::vec![false; dims[2]];
        for z in mask.center_slices() {
            keep_slice[z] = true;
        }
    }
    let data = mask.data();
    let field = |x: usize, y: usize, z: usize| if data[linear_index(dims, x, y, z)] { 1.0 } else { 0.0 };
    let mut sum = 0.0;
    let mut n = 0usize;
    for (x, y, z) in interior(dims) {
        if !keep_slice[z] {
            continue;
        }
        let c = mask.get(x, y, z);
        let on_surface = [
            mask.get(x + 1, y, z),
            mask.get(x - 1, y, z),
            mask.get(x, y + 1, z),
            mask.get(x, y - 1, z),
            mask.get(x, y, z + 1),
            mask.get(x, y, z - 1),
        ]
        .iter()
        .any(|&b| b != c);
        if !on_surface {
            continue;
        }
        let r = match kernel {
            FilterKernel::Laplace => num::abs(laplacian_at(&field, spacing, x, y, z)),
            FilterKernel::Sobel => {
                let g = sobel_raw_at(&field, x, y, z);
                let (gx, gy, gz) = (g[0] / spacing[0], g[1] / spacing[1], g[2] / spacing[2]);
                num::sqrt(gx * gx + gy * gy + gz * gz)
            }
        };
        sum += r;
        n += 1;
    }
    Ok(if n == 0 { 0.0 } else { sum / n as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volume_is_count_times_voxel_size() {
        let m = Mask::from_fn([5, 2, 1], |_, _, _| true);
        assert_eq!(mask_volume(&m, [1.0, 1.0, 3.0]), 30.0);
        assert_eq!(mask_volume(&Mask::from_fn([3, 3, 3], |_, _, _| false), [1.0; 3]), 0.0);
    }

    #[test]
    fn aligned_cylinder_has_zero_centroid_variance() {
        let m = Mask::from_fn([9, 9, 6], |x, y, _| (x as i32 - 4).pow(2) + (y as i32 - 4).pow(2) <= 9);
        assert_eq!(centroid_stat(&m, [1.0, 1.0, 3.0], false).unwrap(), 0.0);
    }

    #[test]
    fn two_centroids_two_mm_apart() {
        let m = Mask::from_fn([5, 3, 2], |x, y, z| y == 1 && ((z == 0 && x == 0) || (z == 1 && x == 2)));
        assert!((centroid_stat(&m, [1.0; 3], false).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closing_fills_single_gap() {
        let m = Mask::from_fn([1, 1, 3], |_, _, z| z != 1);
        assert_eq!(closing_diff(&m, 3, false).unwrap(), 0.5);
    }

    #[test]
    fn closing_is_identity_on_z_convex_masks() {
        let m = Mask::from_fn([6, 6, 9], |x, y, z| x + y <= 6 && z >= x / 2);
        assert_eq!(closing_diff(&m, 5, false).unwrap(), 0.0);
        let once = close_through_plane(&m, 5);
        assert_eq!(close_through_plane(&once, 5), once);
    }

    #[test]
    fn empty_mask_is_flagged() {
        let m = Mask::from_fn([4, 4, 6], |_, _, _| false);
        assert_eq!(closing_diff(&m, 3, false), Err(MetricError::EmptyMask));
        assert_eq!(mask_sharpness(&m, [1.0; 3], FilterKernel::Sobel, false), Err(MetricError::EmptyMask));
    }

    #[test]
    fn full_mask_has_no_surface() {
        let m = Mask::full([6, 6, 6]);
        assert_eq!(mask_sharpness(&m, [1.0; 3], FilterKernel::Laplace, false).unwrap(), 0.0);
        assert_eq!(mask_sharpness(&m, [1.0; 3], FilterKernel::Sobel, false).unwrap(), 0.0);
    }

    #[test]
    fn half_space_step_reads_inverse_spacing() {
        let sp = [0.7, 1.3, 3.0];
        let m = Mask::from_fn([10, 7, 6], |x, _, _| x < 5);
        let s = mask_sharpness(&m, sp, FilterKernel::Sobel, false).unwrap();
        assert!((s - 1.0 / sp[0]).abs() < 1e-6, "{s}");
    }
}
