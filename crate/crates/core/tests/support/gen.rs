//! Random small instances for oracle comparisons.

use fetqc_core::rng::{rng_from_seed, Rng};
use fetqc_core::{Mask, Tissue, TissueMap, Volume};
use rand::Rng as _;

pub fn rng(seed: u64) -> Rng {
    rng_from_seed(seed)
}

/// Grid of 3..=8 × 3..=8 × 2..=7 voxels with spacing in [0.5, 3.5) mm.
pub fn dims_spacing(r: &mut Rng) -> ([usize; 3], [f64; 3]) {
    let dims = [r.gen_range(3..=8), r.gen_range(3..=8), r.gen_range(2..=7)];
    let spacing = [r.gen_range(0.5..3.5), r.gen_range(0.5..3.5), r.gen_range(0.5..3.5)];
    (dims, spacing)
}

/// Continuous, quantized (many ties) or near-constant intensities.
pub fn volume(r: &mut Rng, dims: [usize; 3], spacing: [f64; 3]) -> Volume {
    let style = r.gen_range(0..4);
    let offset = r.gen_range(-5.0..50.0);
    Volume::from_fn(dims, spacing, |_, _, _| match style {
        0 => offset + r.gen_range(0.0..100.0),
        1 => f64::from(r.gen_range(0u8..6)),
        2 => 7.5 + if r.gen_bool(0.05) { 1.0 } else { 0.0 },
        _ => (offset + r.gen_range(0.0..10.0)).abs() + 0.1,
    })
    .expect("valid grid")
}

/// Random mask: blob-like, sparse or with emptied slices.
pub fn mask(r: &mut Rng, dims: [usize; 3]) -> Mask {
    let p = r.gen_range(0.2..0.95);
    let emptied: Vec<bool> = (0..dims[2]).map(|_| r.gen_bool(0.2)).collect();
    let (cx, cy) = (dims[0] as f64 / 2.0, dims[1] as f64 / 2.0);
    let blob = r.gen_bool(0.5);
    Mask::from_fn(dims, |x, y, z| {
        if emptied[z] {
            return false;
        }
        if blob {
            let d = ((x as f64 + 0.5 - cx) / cx).powi(2) + ((y as f64 + 0.5 - cy) / cy).powi(2);
            d < p + 0.2 || r.gen_bool(0.1)
        } else {
            r.gen_bool(p)
        }
    })
}

pub fn tissues(r: &mut Rng, dims: [usize; 3]) -> TissueMap {
    let weights: [f64; 4] = [r.gen_range(0.0..1.0), r.gen_range(0.0..1.0), r.gen_range(0.0..1.0), r.gen_range(0.0..1.0)];
    let total: f64 = weights.iter().sum();
    let n = dims[0] * dims[1] * dims[2];
    let data = (0..n)
        .map(|_| {
            let mut u = r.gen_range(0.0..total);
            for (t, w) in Tissue::ALL.iter().zip(weights) {
                if u < w {
                    return *t;
                }
                u -= w;
            }
            Tissue::Wm
        })
        .collect();
    TissueMap::new(dims, data).expect("valid grid")
}
