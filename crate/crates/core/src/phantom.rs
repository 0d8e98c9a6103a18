//! Synthetic fetal-like stacks with controllable artifacts and a known
//! quality score.
//!
//! A stack images a brain built from nested in-plane ellipses that barely
//! change along the through-plane axis, surrounded by maternal tissue. Motion,
//! signal drops, a bias field, noise and a field-of-view crop are applied in
//! that order. Every random draw happens whatever the knob values, so two specs
//! that differ only in one knob see the same realizations and sweeps are
//! monotone by construction.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng as _;
use thiserror::Error;

use crate::num;
use crate::record::{Split, StackRecord};
use crate::rng::{derive_seed, rng_from_seed, standard_normal, stream};
use crate::volume::{linear_index, LabelMap, Mask, Volume};

/// Score lost per unit of each severity.
pub const QUALITY_WEIGHTS: Severities =
    Severities { motion_rms_mm: 0.5, drop_fraction: 6.0, bias_amplitude: 1.5, noise_std: 20.0, fov_fraction: 8.0 };

/// Intensity factor of a dropped slice.
pub const DROP_FACTOR: f64 = 0.2;

/// Largest per-axis in-plane shift applied to a slice, in mm.
pub const MAX_SHIFT_MM: f64 = 12.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhantomError {
    #[error("invalid phantom parameter `{0}`")]
    InvalidSpec(&'static str),
    #[error("dataset design needs positive counts, `{0}` is zero")]
    EmptyDesign(&'static str),
}

/// Base intensities relative to white matter (scaled by the scanner gain).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TissueModel {
    pub csf: f64,
    pub gm: f64,
    pub wm: f64,
    /// Maternal tissue around the fetal head.
    pub maternal: f64,
    /// Outside the mother.
    pub air: f64,
}

impl Default for TissueModel {
    fn default() -> Self {
        Self { csf: 1.4, gm: 0.6, wm: 1.0, maternal: 0.45, air: 0.02 }
    }
}

impl TissueModel {
    fn intensity(&self, label: u32, inside_body: bool) -> f64 {
        match label {
            1 | 4 => self.csf,
            2 | 5 | 6 => self.gm,
            3 | 7 => self.wm,
            8 => 0.5 * (self.gm + self.wm),
            _ if inside_body => self.maternal,
            _ => self.air,
        }
    }
}

/// Acquisition preset of one synthetic scanner.
#[derive(Debug, Clone, PartialEq)]
pub struct ScannerProfile {
    pub id: String,
    pub site_id: String,
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub gain: f64,
    /// Noise present on every stack, relative to white matter.
    pub noise_floor: f64,
    pub tissue: TissueModel,
}

/// Deterministic preset for the `index`-th scanner. Presets differ in
/// resolution, gain, noise floor and contrast while covering a similar
/// physical field of view.
pub fn scanner_profile(index: usize, site_id: &str) -> ScannerProfile {
    const INPLANE: [f64; 8] = [1.2, 1.5, 1.35, 1.65, 1.25, 1.55, 1.4, 1.7];
    const THICK: [f64; 8] = [3.0, 4.0, 3.5, 4.5, 3.25, 3.75, 4.25, 3.0];
    const GAIN: [f64; 8] = [800.0, 1200.0, 1000.0, 600.0, 1500.0, 900.0, 700.0, 1100.0];
    const FLOOR: [f64; 8] = [0.008, 0.012, 0.01, 0.015, 0.009, 0.014, 0.011, 0.013];
    const GM: [f64; 8] = [0.6, 0.55, 0.65, 0.58, 0.62, 0.57, 0.63, 0.6];
    let i = index % 8;
    let s = INPLANE[i];
    let t = THICK[i];
    let n = (96.0 / s) as usize;
    let nz = (84.0 / t) as usize;
    ScannerProfile {
        id: format!("scanner{}", index + 1),
        site_id: site_id.into(),
        dims: [n, n, nz],
        spacing: [s, s, t],
        gain: GAIN[i],
        noise_floor: FLOOR[i],
        tissue: TissueModel { gm: GM[i], ..TissueModel::default() },
    }
}

/// Everything needed to synthesize one stack.
#[derive(Debug, Clone, PartialEq)]
pub struct PhantomSpec {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub tissue: TissueModel,
    /// Standard deviation (mm) of the per-slice in-plane translation.
    pub motion_shift_std: f64,
    pub slice_drop_prob: f64,
    pub bias_amplitude: f64,
    /// Added noise standard deviation, relative to white matter.
    pub noise_std: f64,
    /// Fraction of the through-plane extent removed.
    pub fov_crop_fraction: f64,
    pub scanner_profile: String,
    pub gain: f64,
    pub noise_floor: f64,
    /// Brain semi-axes (mm) along x and y.
    pub brain_axes: [f64; 2],
    /// Amplitude (mm) of a high-frequency ripple on the brain outline.
    pub boundary_ripple: f64,
    pub seed: u64,
}

impl PhantomSpec {
    /// Artifact-free stack with a default 64 × 64 × 20 grid.
    pub fn clean(seed: u64) -> Self {
        Self {
            dims: [64, 64, 20],
            spacing: [1.5, 1.5, 4.0],
            tissue: TissueModel::default(),
            motion_shift_std: 0.0,
            slice_drop_prob: 0.0,
            bias_amplitude: 0.0,
            noise_std: 0.0,
            fov_crop_fraction: 0.0,
            scanner_profile: "default".into(),
            gain: 1000.0,
            noise_floor: 0.01,
            brain_axes: [30.0, 36.0],
            boundary_ripple: 0.0,
            seed,
        }
    }

    /// Clean stack acquired with `profile`.
    pub fn for_scanner(profile: &ScannerProfile, seed: u64) -> Self {
        Self {
            dims: profile.dims,
            spacing: profile.spacing,
            tissue: profile.tissue,
            scanner_profile: profile.id.clone(),
            gain: profile.gain,
            noise_floor: profile.noise_floor,
            ..Self::clean(seed)
        }
    }

    pub fn validate(&self) -> Result<(), PhantomError> {
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if self.dims.contains(&0) {
            return Err(PhantomError::InvalidSpec("dims"));
        }
        if self.spacing.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
            return Err(PhantomError::InvalidSpec("spacing"));
        }
        if !nonneg(self.motion_shift_std) {
            return Err(PhantomError::InvalidSpec("motion_shift_std"));
        }
        if !(nonneg(self.slice_drop_prob) && self.slice_drop_prob <= 1.0) {
            return Err(PhantomError::InvalidSpec("slice_drop_prob"));
        }
        if !nonneg(self.bias_amplitude) {
            return Err(PhantomError::InvalidSpec("bias_amplitude"));
        }
        if !nonneg(self.noise_std) || !nonneg(self.noise_floor) {
            return Err(PhantomError::InvalidSpec("noise_std"));
        }
        if !(nonneg(self.fov_crop_fraction) && self.fov_crop_fraction < 0.5) {
            return Err(PhantomError::InvalidSpec("fov_crop_fraction"));
        }
        if !(self.gain.is_finite() && self.gain > 0.0) {
            return Err(PhantomError::InvalidSpec("gain"));
        }
        if self.brain_axes.iter().any(|&a| !(a.is_finite() && a > 0.0)) || !nonneg(self.boundary_ripple) {
            return Err(PhantomError::InvalidSpec("brain_axes"));
        }
        Ok(())
    }
}

/// Realized artifact magnitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Severities {
    /// Root mean square of the per-slice shift length, in mm.
    pub motion_rms_mm: f64,
    pub drop_fraction: f64,
    pub bias_amplitude: f64,
    pub noise_std: f64,
    pub fov_fraction: f64,
}

impl Severities {
    /// Weighted sum with [`QUALITY_WEIGHTS`].
    pub fn penalty(&self) -> f64 {
        let w = QUALITY_WEIGHTS;
        w.motion_rms_mm * self.motion_rms_mm
            + w.drop_fraction * self.drop_fraction
            + w.bias_amplitude * self.bias_amplitude
            + w.noise_std * self.noise_std
            + w.fov_fraction * self.fov_fraction
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruthQuality {
    /// `clamp(4 − penalty, 0, 4)`.
    pub score: f64,
    pub severities: Severities,
}

impl GroundTruthQuality {
    pub fn from_severities(severities: Severities) -> Self {
        Self { score: (4.0 - severities.penalty()).clamp(0.0, 4.0), severities }
    }
}

/// A generated stack with its brain mask and 8-class segmentation.
#[derive(Debug, Clone, PartialEq)]
pub struct PhantomStack {
    pub volume: Volume,
    pub mask: Mask,
    pub labels: LabelMap,
    pub quality: GroundTruthQuality,
}

/// Structures inside the brain outline: (label, centre, semi-axes) in units of
/// the brain semi-axes, listed by drawing priority.
const STRUCTURES: [(u32, [f64; 2], [f64; 2]); 8] = [
    (8, [0.0, 0.12], [0.22, 0.05]),
    (4, [-0.22, 0.0], [0.08, 0.22]),
    (4, [0.22, 0.0], [0.08, 0.22]),
    (6, [-0.32, 0.3], [0.1, 0.1]),
    (6, [0.32, 0.3], [0.1, 0.1]),
    (7, [0.0, -0.32], [0.07, 0.08]),
    (5, [0.0, -0.55], [0.25, 0.12]),
    (0, [0.0, 0.0], [0.0, 0.0]),
];

/// FeTA-style label at in-plane position (u, v) mm from the brain centre and
/// normalized through-plane position `w` in [-1, 1].
fn label_at(u: f64, v: f64, w: f64, axes: [f64; 2], ripple: f64) -> u32 {
    // Super-ellipsoidal taper: the cross-section shrinks by < 1 % over the stack.
    let taper = 1.0 - 0.005 * w * w;
    let (a, b) = (axes[0] * taper, axes[1] * taper);
    let r = num::sqrt(u * u + v * v);
    let ripple_rel = if ripple > 0.0 && r > 0.0 {
        // cos(12θ) from the Chebyshev polynomial of cos θ.
        let c = u / r;
        ripple * chebyshev12(c) / b
    } else {
        0.0
    };
    let (pu, pv) = (u / a, v / b);
    let rho = num::sqrt(pu * pu + pv * pv) - ripple_rel;
    if rho > 1.0 {
        return 0;
    }
    if rho > 0.86 {
        return 1;
    }
    if rho > 0.72 {
        return 2;
    }
    for &(label, c, s) in STRUCTURES.iter().take(7) {
        let du = (pu - c[0]) / s[0];
        let dv = (pv - c[1]) / s[1];
        if du * du + dv * dv <= 1.0 {
            return label;
        }
    }
    3
}

fn chebyshev12(c: f64) -> f64 {
    let (mut t0, mut t1) = (1.0, c);
    for _ in 1..12 {
        let t2 = 2.0 * c * t1 - t0;
        t0 = t1;
        t1 = t2;
    }
    t1
}

fn normalized(i: usize, n: usize) -> f64 {
    if n <= 1 {
        0.0
    } else {
        2.0 * i as f64 / (n - 1) as f64 - 1.0
    }
}

/// Fixed bias profile with unit range over the normalized grid cube.
pub fn bias_profile(nx: f64, ny: f64, nz: f64) -> f64 {
    (0.5 * nx + 0.25 * ny + 0.25 * nz * nz) / 1.75
}

const SUBSAMPLES: [f64; 2] = [-0.25, 0.25];

/// Generates one stack. Deterministic in `spec`.
pub fn gen_stack(spec: &PhantomSpec) -> Result<PhantomStack, PhantomError> {
    spec.validate()?;
    let [nx, ny, nz] = spec.dims;
    let [sx, sy, _] = spec.spacing;
    let mut rng = rng_from_seed(derive_seed(spec.seed, stream::PHANTOM, 0));
    let mut shifts = Vec::with_capacity(nz);
    let mut dropped = Vec::with_capacity(nz);
    for _ in 0..nz {
        let dx = (standard_normal(&mut rng) * spec.motion_shift_std).clamp(-MAX_SHIFT_MM, MAX_SHIFT_MM);
        let dy = (standard_normal(&mut rng) * spec.motion_shift_std).clamp(-MAX_SHIFT_MM, MAX_SHIFT_MM);
        shifts.push((dx, dy));
        dropped.push(rng.gen::<f64>() < spec.slice_drop_prob);
    }
    let crop_at_top = rng.gen::<bool>();
    let n_removed = (num::floor(spec.fov_crop_fraction * nz as f64 + 0.5) as usize).min(nz.saturating_sub(1));

    let (cx, cy) = ((nx as f64 - 1.0) / 2.0, (ny as f64 - 1.0) / 2.0);
    let body = [0.47 * nx as f64 * sx, 0.47 * ny as f64 * sy];
    let n = nx * ny * nz;
    let mut data = alloc::vec![0.0; n];
    let mut labels = alloc::vec![0u32; n];
    for z in 0..nz {
        let w = normalized(z, nz);
        let (dx, dy) = shifts[z];
        for y in 0..ny {
            for x in 0..nx {
                let idx = linear_index(spec.dims, x, y, z);
                let u = (x as f64 - cx) * sx - dx;
                let v = (y as f64 - cy) * sy - dy;
                labels[idx] = label_at(u, v, w, spec.brain_axes, spec.boundary_ripple);
                let mut acc = 0.0;
                for ox in SUBSAMPLES {
                    for oy in SUBSAMPLES {
                        let (uu, vv) = (u + ox * sx, v + oy * sy);
                        let bu = (x as f64 + ox - cx) * sx / body[0];
                        let bv = (y as f64 + oy - cy) * sy / body[1];
                        let inside = bu * bu + bv * bv <= 1.0;
                        acc += spec.tissue.intensity(label_at(uu, vv, w, spec.brain_axes, spec.boundary_ripple), inside);
                    }
                }
                data[idx] = acc / 4.0;
            }
        }
    }
    for z in 0..nz {
        if dropped[z] {
            for v in &mut data[z * nx * ny..(z + 1) * nx * ny] {
                *v *= DROP_FACTOR;
            }
        }
    }
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                let g = bias_profile(normalized(x, nx), normalized(y, ny), normalized(z, nz));
                data[linear_index(spec.dims, x, y, z)] *= num::exp(spec.bias_amplitude * g);
            }
        }
    }
    let sigma = spec.noise_std + spec.noise_floor;
    let mut noise_rng = rng_from_seed(derive_seed(spec.seed, stream::PHANTOM, 1));
    for v in &mut data {
        *v = (*v + sigma * standard_normal(&mut noise_rng)) * spec.gain;
    }

    let (z0, z1) = if crop_at_top { (0, nz - n_removed) } else { (n_removed, nz) };
    let full = Volume::from_fn(spec.dims, spec.spacing, |x, y, z| data[linear_index(spec.dims, x, y, z)])
        .map_err(|_| PhantomError::InvalidSpec("dims"))?;
    let mask = Mask::from_fn(spec.dims, |x, y, z| labels[linear_index(spec.dims, x, y, z)] != 0);
    let labels = LabelMap::new(spec.dims, labels).map_err(|_| PhantomError::InvalidSpec("dims"))?;

    let kept = z0..z1;
    let motion_rms_mm = if nz == 0 {
        0.0
    } else {
        num::sqrt(shifts.iter().map(|(a, b)| a * a + b * b).sum::<f64>() / nz as f64)
    };
    let drop_fraction = kept.clone().filter(|&z| dropped[z]).count() as f64 / kept.len() as f64;
    let quality = GroundTruthQuality::from_severities(Severities {
        motion_rms_mm,
        drop_fraction,
        bias_amplitude: spec.bias_amplitude,
        noise_std: spec.noise_std,
        fov_fraction: n_removed as f64 / nz as f64,
    });
    Ok(PhantomStack {
        volume: full.crop_slices(z0, z1),
        mask: mask.crop_slices(z0, z1),
        labels: labels.crop_slices(z0, z1),
        quality,
    })
}

/// Brain mask from intensities alone: voxels above the Otsu threshold of the
/// in-body intensities that lie inside the central in-plane disc. A fallback
/// for stacks without a mask, not a segmentation method.
pub fn fallback_mask(vol: &Volume) -> Mask {
    let dims = vol.dims();
    let data = vol.data();
    let (lo, hi) = data.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if hi.partial_cmp(&lo) != Some(core::cmp::Ordering::Greater) {
        return Mask::from_fn(dims, |_, _, _| false);
    }
    const BINS: usize = 256;
    let mut hist = [0u64; BINS];
    let bin = |v: f64| (((v - lo) / (hi - lo) * BINS as f64) as usize).min(BINS - 1);
    for &v in data {
        hist[bin(v)] += 1;
    }
    let total = data.len() as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let (mut w0, mut sum0, mut best, mut t_best) = (0.0, 0.0, -1.0, 0usize);
    for (t, &c) in hist.iter().enumerate() {
        w0 += c as f64;
        sum0 += t as f64 * c as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let d = sum0 / w0 - (sum_all - sum0) / w1;
        let between = w0 * w1 * d * d;
        if between > best {
            best = between;
            t_best = t;
        }
    }
    let threshold = lo + (t_best + 1) as f64 / BINS as f64 * (hi - lo);
    let [nx, ny, _] = dims;
    let (cx, cy) = ((nx as f64 - 1.0) / 2.0, (ny as f64 - 1.0) / 2.0);
    let r2 = (0.4 * nx.min(ny) as f64) * (0.4 * nx.min(ny) as f64);
    Mask::from_fn(dims, |x, y, z| {
        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
        dx * dx + dy * dy <= r2 && vol.get(x, y, z) > threshold
    })
}

/// Shape of a synthetic multi-site dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetConfig {
    pub n_sites: usize,
    pub n_scanners_per_site: usize,
    pub n_subjects_per_scanner: usize,
    /// Inclusive range of stacks per subject.
    pub stacks_per_subject: (usize, usize),
    pub master_seed: u64,
    /// Standard deviation of the rater noise added to the true score.
    pub rater_noise: f64,
    /// Number of scanners, counted from the last, assigned to the pure test split.
    pub pure_test_scanners: usize,
    /// Weight of the subject tendency in the latent stack badness; the rest is
    /// per-stack variation.
    pub subject_weight: f64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            n_sites: 2,
            n_scanners_per_site: 4,
            n_subjects_per_scanner: 10,
            stacks_per_subject: (3, 6),
            master_seed: 0,
            rater_noise: 0.25,
            pure_test_scanners: 0,
            subject_weight: 0.55,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannedStack {
    pub record: StackRecord,
    pub spec: PhantomSpec,
    /// Seed of the rater noise for this stack.
    pub rating_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetPlan {
    pub scanners: Vec<ScannerProfile>,
    pub stacks: Vec<PlannedStack>,
    pub rater_noise: f64,
}

/// Turns a latent badness into artifact knobs by spreading the target
/// penalty over the five artifact families with random shares.
fn knobs_for(spec: &mut PhantomSpec, penalty: f64, shares: [f64; 5]) {
    let total: f64 = shares.iter().sum();
    let part = |i: usize| penalty * shares[i] / total;
    let w = QUALITY_WEIGHTS;
    spec.motion_shift_std = part(0) / w.motion_rms_mm / core::f64::consts::SQRT_2;
    spec.slice_drop_prob = (part(1) / w.drop_fraction).min(1.0);
    spec.bias_amplitude = part(2) / w.bias_amplitude;
    spec.noise_std = part(3) / w.noise_std;
    spec.fov_crop_fraction = (part(4) / w.fov_fraction).min(0.45);
}

/// Plans every stack of a dataset: scanners, subjects, artifact knobs and
/// seeds. Stacks of a subject share a tendency, so their quality correlates.
pub fn plan_dataset(cfg: &DatasetConfig) -> Result<DatasetPlan, PhantomError> {
    if cfg.n_sites == 0 {
        return Err(PhantomError::EmptyDesign("n_sites"));
    }
    if cfg.n_scanners_per_site == 0 {
        return Err(PhantomError::EmptyDesign("n_scanners_per_site"));
    }
    if cfg.n_subjects_per_scanner == 0 {
        return Err(PhantomError::EmptyDesign("n_subjects_per_scanner"));
    }
    let (lo, hi) = cfg.stacks_per_subject;
    if lo == 0 || hi < lo {
        return Err(PhantomError::EmptyDesign("stacks_per_subject"));
    }
    if !(cfg.rater_noise.is_finite() && cfg.rater_noise >= 0.0) {
        return Err(PhantomError::InvalidSpec("rater_noise"));
    }
    if !(0.0..=1.0).contains(&cfg.subject_weight) {
        return Err(PhantomError::InvalidSpec("subject_weight"));
    }
    let n_scanners = cfg.n_sites * cfg.n_scanners_per_site;
    let mut rng = rng_from_seed(derive_seed(cfg.master_seed, stream::DATASET, 0));
    let mut scanners = Vec::with_capacity(n_scanners);
    let mut stacks = Vec::new();
    let stack_weight = num::sqrt(1.0 - cfg.subject_weight * cfg.subject_weight);
    let mut subject_no = 0usize;
    for site in 0..cfg.n_sites {
        let site_id = format!("site{}", site + 1);
        for k in 0..cfg.n_scanners_per_site {
            let index = site * cfg.n_scanners_per_site + k;
            let profile = scanner_profile(index, &site_id);
            let split = if index + cfg.pure_test_scanners >= n_scanners { Split::PureTest } else { Split::Train };
            for _ in 0..cfg.n_subjects_per_scanner {
                subject_no += 1;
                let subject_id = format!("{subject_no:03}");
                let tendency = standard_normal(&mut rng);
                let size = 0.9 + 0.2 * rng.gen::<f64>();
                let n_stacks = rng.gen_range(lo..=hi);
                for run in 1..=n_stacks {
                    let latent = cfg.subject_weight * tendency + stack_weight * standard_normal(&mut rng);
                    let penalty = (1.8 + 1.3 * latent).clamp(0.0, 5.0);
                    let mut shares = [0.0; 5];
                    for s in &mut shares {
                        let u: f64 = rng.gen();
                        *s = u * u + 1e-3;
                    }
                    let stack_seed = rng.gen::<u64>();
                    let rating_seed = rng.gen::<u64>();
                    let mut spec = PhantomSpec::for_scanner(&profile, stack_seed);
                    spec.brain_axes = [30.0 * size, 36.0 * size];
                    knobs_for(&mut spec, penalty, shares);
                    let stack_id = format!("sub-{subject_id}_run-{run}");
                    let mut record = StackRecord::new(&stack_id, &subject_id, &profile.id, &site_id);
                    record.run_id = format!("{run}");
                    record.split = split;
                    stacks.push(PlannedStack { record, spec, rating_seed });
                }
            }
            scanners.push(profile);
        }
    }
    Ok(DatasetPlan { scanners, stacks, rater_noise: cfg.rater_noise })
}

/// Rating of a rater with Gaussian noise of standard deviation `sigma`,
/// clamped to the rating scale.
pub fn noisy_rating(score: f64, sigma: f64, seed: u64) -> f64 {
    let mut rng = rng_from_seed(seed);
    (score + sigma * standard_normal(&mut rng)).clamp(0.0, 4.0)
}
