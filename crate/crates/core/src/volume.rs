//! Voxel grids: intensity volumes, binary masks and label maps.
//!
//! Data is stored x-fastest: `index = x + nx * (y + ny * z)`. Axis 2 is the
//! through-plane (slice) axis.

use alloc::vec::Vec;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VolumeError {
    #[error("data length {len} does not match dims {dims:?}")]
    LengthMismatch { dims: [usize; 3], len: usize },
    #[error("every dimension must be at least 1, got {0:?}")]
    ZeroDim([usize; 3]),
    #[error("voxel spacing must be finite and strictly positive")]
    BadSpacing,
    #[error("grid {found:?} does not match {expected:?}")]
    GridMismatch { expected: [usize; 3], found: [usize; 3] },
}

/// Identity-like voxel-to-world transform for a given spacing.
pub fn diagonal_affine(spacing: [f64; 3]) -> [[f64; 4]; 4] {
    [
        [spacing[0], 0.0, 0.0, 0.0],
        [0.0, spacing[1], 0.0, 0.0],
        [0.0, 0.0, spacing[2], 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]
}

fn check_dims(dims: [usize; 3], len: usize) -> Result<(), VolumeError> {
    if dims.contains(&0) {
        return Err(VolumeError::ZeroDim(dims));
    }
    if dims[0] * dims[1] * dims[2] != len {
        return Err(VolumeError::LengthMismatch { dims, len });
    }
    Ok(())
}

#[inline]
pub fn linear_index(dims: [usize; 3], x: usize, y: usize, z: usize) -> usize {
    x + dims[0] * (y + dims[1] * z)
}

/// A scalar 3D image with physical spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    dims: [usize; 3],
    spacing: [f64; 3],
    affine: [[f64; 4]; 4],
    data: Vec<f64>,
    nonfinite_replaced: usize,
}

impl Volume {
    /// Builds a volume, replacing non-finite voxels by 0. The number of
    /// replaced voxels is kept as a load diagnostic.
    pub fn new(
        dims: [usize; 3],
        spacing: [f64; 3],
        affine: [[f64; 4]; 4],
        mut data: Vec<f64>,
    ) -> Result<Self, VolumeError> {
        check_dims(dims, data.len())?;
        if spacing.iter().any(|s| !s.is_finite() || *s <= 0.0) {
            return Err(VolumeError::BadSpacing);
        }
        let mut replaced = 0;
        for v in data.iter_mut() {
            if !v.is_finite() {
                *v = 0.0;
                replaced += 1;
            }
        }
        Ok(Self { dims, spacing, affine, data, nonfinite_replaced: replaced })
    }

    pub fn from_fn(
        dims: [usize; 3],
        spacing: [f64; 3],
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self, VolumeError> {
        let mut data = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for z in 0..dims[2] {
            for y in 0..dims[1] {
                for x in 0..dims[0] {
                    data.push(f(x, y, z));
                }
            }
        }
        Self::new(dims, spacing, diagonal_affine(spacing), data)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn affine(&self) -> &[[f64; 4]; 4] {
        &self.affine
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn nonfinite_replaced(&self) -> usize {
        self.nonfinite_replaced
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> f64 {
        self.data[linear_index(self.dims, x, y, z)]
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Returns a copy whose intensities are `f(v)`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Volume {
        let mut out = self.clone();
        for v in out.data.iter_mut() {
            *v = f(*v);
        }
        out
    }

    /// Keeps slices `z0..z1` along the through-plane axis.
    pub fn crop_slices(&self, z0: usize, z1: usize) -> Volume {
        let plane = self.dims[0] * self.dims[1];
        let data = self.data[z0 * plane..z1 * plane].to_vec();
        let mut affine = self.affine;
        for row in affine.iter_mut().take(3) {
            row[3] += row[2] * z0 as f64;
        }
        Volume {
            dims: [self.dims[0], self.dims[1], z1 - z0],
            spacing: self.spacing,
            affine,
            data,
            nonfinite_replaced: self.nonfinite_replaced,
        }
    }

    /// True when the grid meets the minimum stack size used for reports.
    pub fn meets_minimum_size(&self) -> bool {
        self.dims[0] >= 8 && self.dims[1] >= 8 && self.dims[2] >= 3
    }
}

/// Binary brain mask on the grid of a [`Volume`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    dims: [usize; 3],
    data: Vec<bool>,
}

impl Mask {
    pub fn new(dims: [usize; 3], data: Vec<bool>) -> Result<Self, VolumeError> {
        check_dims(dims, data.len())?;
        Ok(Self { dims, data })
    }

    pub fn from_fn(dims: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for z in 0..dims[2] {
            for y in 0..dims[1] {
                for x in 0..dims[0] {
                    data.push(f(x, y, z));
                }
            }
        }
        Self { dims, data }
    }

    pub fn full(dims: [usize; 3]) -> Self {
        Self { dims, data: alloc::vec![true; dims[0] * dims[1] * dims[2]] }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> bool {
        self.data[linear_index(self.dims, x, y, z)]
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&b| b)
    }

    pub fn check_grid(&self, dims: [usize; 3]) -> Result<(), VolumeError> {
        if self.dims != dims {
            return Err(VolumeError::GridMismatch { expected: dims, found: self.dims });
        }
        Ok(())
    }

    /// Number of true voxels in every slice.
    pub fn slice_counts(&self) -> Vec<usize> {
        let plane = self.dims[0] * self.dims[1];
        self.data.chunks(plane).map(|s| s.iter().filter(|&&b| b).count()).collect()
    }

    /// Indices of slices holding at least one mask voxel.
    pub fn kept_slices(&self) -> Vec<usize> {
        self.slice_counts()
            .into_iter()
            .enumerate()
            .filter(|(_, c)| *c > 0)
            .map(|(z, _)| z)
            .collect()
    }

    /// The third of the kept slices closest to the center of the brain.
    pub fn center_slices(&self) -> Vec<usize> {
        center_third(&self.kept_slices())
    }

    /// Mask restricted to the listed slices.
    pub fn restrict_to_slices(&self, slices: &[usize]) -> Mask {
        let plane = self.dims[0] * self.dims[1];
        let mut data = alloc::vec![false; self.data.len()];
        for &z in slices {
            data[z * plane..(z + 1) * plane].copy_from_slice(&self.data[z * plane..(z + 1) * plane]);
        }
        Mask { dims: self.dims, data }
    }

    /// Mask covering every voxel of the listed slices.
    pub fn slab(dims: [usize; 3], slices: &[usize]) -> Mask {
        let plane = dims[0] * dims[1];
        let mut data = alloc::vec![false; dims[0] * dims[1] * dims[2]];
        for &z in slices {
            data[z * plane..(z + 1) * plane].iter_mut().for_each(|b| *b = true);
        }
        Mask { dims, data }
    }

    pub fn crop_slices(&self, z0: usize, z1: usize) -> Mask {
        let plane = self.dims[0] * self.dims[1];
        Mask {
            dims: [self.dims[0], self.dims[1], z1 - z0],
            data: self.data[z0 * plane..z1 * plane].to_vec(),
        }
    }

    /// In-plane bounding box `(x0, x1, y0, y1)` (exclusive ends) over all slices.
    pub fn inplane_bbox(&self) -> Option<(usize, usize, usize, usize)> {
        let [nx, ny, nz] = self.dims;
        let (mut x0, mut x1, mut y0, mut y1) = (usize::MAX, 0, usize::MAX, 0);
        for z in 0..nz {
            for y in 0..ny {
                for x in 0..nx {
                    if self.get(x, y, z) {
                        x0 = x0.min(x);
                        x1 = x1.max(x + 1);
                        y0 = y0.min(y);
                        y1 = y1.max(y + 1);
                    }
                }
            }
        }
        (x0 != usize::MAX).then_some((x0, x1, y0, y1))
    }
}

/// Middle third (rounded up) of an ordered list of slice indices.
pub fn center_third(kept: &[usize]) -> Vec<usize> {
    let n = kept.len();
    if n == 0 {
        return Vec::new();
    }
    let k = n.div_ceil(3);
    let start = (n - k) / 2;
    kept[start..start + k].to_vec()
}

/// Raw segmentation labels as produced by an external segmenter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    dims: [usize; 3],
    data: Vec<u32>,
}

impl LabelMap {
    pub fn new(dims: [usize; 3], data: Vec<u32>) -> Result<Self, VolumeError> {
        check_dims(dims, data.len())?;
        Ok(Self { dims, data })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    pub fn crop_slices(&self, z0: usize, z1: usize) -> LabelMap {
        let plane = self.dims[0] * self.dims[1];
        LabelMap {
            dims: [self.dims[0], self.dims[1], z1 - z0],
            data: self.data[z0 * plane..z1 * plane].to_vec(),
        }
    }
}

/// Merged tissue classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tissue {
    Bg,
    Csf,
    Gm,
    Wm,
}

impl Tissue {
    pub const ALL: [Tissue; 4] = [Tissue::Bg, Tissue::Csf, Tissue::Gm, Tissue::Wm];

    pub fn name(self) -> &'static str {
        match self {
            Tissue::Bg => "BG",
            Tissue::Csf => "CSF",
            Tissue::Gm => "GM",
            Tissue::Wm => "WM",
        }
    }

    pub fn parse(s: &str) -> Option<Tissue> {
        Tissue::ALL.into_iter().find(|t| t.name().eq_ignore_ascii_case(s))
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Label map after merging into {BG, CSF, GM, WM}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TissueMap {
    dims: [usize; 3],
    data: Vec<Tissue>,
}

impl TissueMap {
    pub fn new(dims: [usize; 3], data: Vec<Tissue>) -> Result<Self, VolumeError> {
        check_dims(dims, data.len())?;
        Ok(Self { dims, data })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn data(&self) -> &[Tissue] {
        &self.data
    }

    /// Voxels of `tissue` restricted to the optional slice list.
    pub fn region(&self, tissue: Tissue, slices: Option<&[usize]>) -> Mask {
        let plane = self.dims[0] * self.dims[1];
        let mut data: Vec<bool> = self.data.iter().map(|&t| t == tissue).collect();
        if let Some(slices) = slices {
            let mut keep = alloc::vec![false; self.dims[2]];
            for &z in slices {
                keep[z] = true;
            }
            for (z, chunk) in data.chunks_mut(plane).enumerate() {
                if !keep[z] {
                    chunk.iter_mut().for_each(|b| *b = false);
                }
            }
        }
        Mask { dims: self.dims, data }
    }
}
