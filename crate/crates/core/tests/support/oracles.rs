//! Brute-force reference implementations written from the metric definitions.
//!
//! Each oracle recomputes its result directly from voxels, pairs or samples
//! and shares no code with the library beyond the data types.

use fetqc_core::iqm::intensity::{MaskCombine, Pairing, SliceMetricKind};
use fetqc_core::{Mask, Tissue, TissueMap, Volume};
use nalgebra::DMatrix;

/// `|a - b| <= rel · max(|a|, |b|) + 1e-12`; two NaNs compare equal.
pub fn close(a: f64, b: f64, rel: f64) -> bool {
    if a.is_nan() || b.is_nan() {
        return a.is_nan() && b.is_nan();
    }
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs()) + 1e-12
}

pub fn close_opt(a: Option<f64>, b: Option<f64>, rel: f64) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => close(x, y, rel),
        (None, None) => true,
        _ => false,
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn pop_var(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64
}

/// Slices holding at least one mask voxel.
pub fn kept_slices(mask: &Mask) -> Vec<usize> {
    let [nx, ny, nz] = mask.dims();
    (0..nz).filter(|&z| (0..ny).any(|y| (0..nx).any(|x| mask.get(x, y, z)))).collect()
}

/// The `ceil(n / 3)` entries of `s` closest to its middle.
pub fn center_third(s: &[usize]) -> Vec<usize> {
    let n = s.len();
    let k = n.div_ceil(3);
    let start = (n - k) / 2;
    s[start..start + k].to_vec()
}

/// Rows of the masked slices cropped to the in-plane bounding box of the mask
/// over `slices`, with each row's inside flags.
pub struct Crop {
    pub rows: Vec<Vec<f64>>,
    pub inside: Vec<Vec<bool>>,
    pub slices: Vec<usize>,
}

pub fn crop(vol: &Volume, mask: &Mask, slices: &[usize], zero_outside: bool) -> Option<Crop> {
    let [nx, ny, _] = mask.dims();
    let mut bb: Option<(usize, usize, usize, usize)> = None;
    for &z in slices {
        for y in 0..ny {
            for x in 0..nx {
                if mask.get(x, y, z) {
                    bb = Some(match bb {
                        None => (x, x, y, y),
                        Some((a, b, c, d)) => (a.min(x), b.max(x), c.min(y), d.max(y)),
                    });
                }
            }
        }
    }
    let (x0, x1, y0, y1) = bb?;
    let mut out = Crop { rows: vec![], inside: vec![], slices: vec![] };
    for &z in slices {
        let mut row = vec![];
        let mut ins = vec![];
        for y in y0..=y1 {
            for x in x0..=x1 {
                let m = mask.get(x, y, z);
                row.push(if m || !zero_outside { vol.get(x, y, z) } else { 0.0 });
                ins.push(m);
            }
        }
        if ins.iter().any(|&b| b) {
            out.rows.push(row);
            out.inside.push(ins);
            out.slices.push(z);
        }
    }
    Some(out)
}

/// Effective rank by SVD divided by the slice count, optionally per cm³.
pub fn rank_error(vol: &Volume, mask: &Mask, center_only: bool, relative: bool, masked: bool, threshold: f64) -> Option<f64> {
    let kept = kept_slices(mask);
    let sl = if center_only { center_third(&kept) } else { kept };
    if sl.len() < 2 {
        return None;
    }
    let c = crop(vol, mask, &sl, masked)?;
    let (n, p) = (c.rows.len(), c.rows[0].len());
    let m = DMatrix::from_fn(n, p, |i, j| c.rows[i][j]);
    let mut s2: Vec<f64> = m.singular_values().iter().map(|s| s * s).collect();
    s2.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = s2.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let rank = (1..=s2.len()).find(|&r| (s2[r..].iter().sum::<f64>() / total).sqrt() <= threshold).unwrap_or(s2.len());
    let mut score = rank as f64 / n as f64;
    if relative {
        let sp = vol.spacing();
        let voxels: usize = sl.iter().map(|&z| c_count(mask, z)).sum();
        score /= voxels as f64 * sp[0] * sp[1] * sp[2] / 1000.0;
    }
    Some(score)
}

fn c_count(mask: &Mask, z: usize) -> usize {
    let [nx, ny, _] = mask.dims();
    (0..ny).flat_map(|y| (0..nx).map(move |x| (x, y))).filter(|&(x, y)| mask.get(x, y, z)).count()
}

fn bin(v: f64, lo: f64, hi: f64, bins: usize) -> usize {
    if hi <= lo {
        0
    } else {
        (((v - lo) / (hi - lo) * bins as f64).floor() as usize).min(bins - 1)
    }
}

fn entropy_of(counts: &[usize]) -> f64 {
    let t: usize = counts.iter().sum();
    counts.iter().filter(|&&c| c > 0).map(|&c| c as f64 / t as f64).map(|p| -p * p.log2()).sum()
}

/// Pixel-level metric of one slice pair.
pub fn pair_metric(kind: SliceMetricKind, a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    if a.is_empty() {
        return None;
    }
    let lo = a.iter().chain(b).copied().fold(f64::INFINITY, f64::min);
    let hi = a.iter().chain(b).copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mse = diff.iter().map(|d| d * d).sum::<f64>() / n;
    let mae = diff.iter().map(|d| d.abs()).sum::<f64>() / n;
    let (ma, mb, va, vb) = (mean(a), mean(b), pop_var(a), pop_var(b));
    let cov = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / n;
    let hist = || {
        const B: usize = 128;
        let mut joint = vec![0usize; B * B];
        let (mut hx, mut hy) = (vec![0usize; B], vec![0usize; B]);
        for (&x, &y) in a.iter().zip(b) {
            let (i, j) = (bin(x, lo, hi, B), bin(y, lo, hi, B));
            joint[i * B + j] += 1;
            hx[i] += 1;
            hy[j] += 1;
        }
        (entropy_of(&hx), entropy_of(&hy), entropy_of(&joint))
    };
    match kind {
        SliceMetricKind::Mae => Some(mae),
        SliceMetricKind::NMae => {
            let scale = a.iter().zip(b).map(|(x, y)| (x.abs() + y.abs()) / 2.0).sum::<f64>() / n;
            (scale > 0.0).then(|| mae / scale)
        }
        SliceMetricKind::Rmse => Some(mse.sqrt()),
        SliceMetricKind::NRmse => (range > 0.0).then(|| mse.sqrt() / range),
        SliceMetricKind::Ncc => (a.len() >= 2 && va > 0.0 && vb > 0.0).then(|| (cov / (va.sqrt() * vb.sqrt())).clamp(-1.0, 1.0)),
        SliceMetricKind::Psnr => Some(if mse == 0.0 { 100.0 } else { (10.0 * (range * range / mse).log10()).min(100.0) }),
        SliceMetricKind::Ssim => {
            if va <= 0.0 || vb <= 0.0 {
                return None;
            }
            let (c1, c2) = ((0.01 * range).powi(2), (0.03 * range).powi(2));
            Some((2.0 * ma * mb + c1) * (2.0 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2)))
        }
        SliceMetricKind::Mi => {
            let (x, y, xy) = hist();
            Some((x + y - xy).max(0.0))
        }
        SliceMetricKind::NMi => {
            let (x, y, xy) = hist();
            (xy > 0.0).then(|| (x + y) / xy)
        }
        SliceMetricKind::JointEntropy => Some(hist().2),
    }
}

/// Mean pair metric over eligible slice pairs; `None` when undefined.
pub fn slice_pair_metric(vol: &Volume, mask: &Mask, kind: SliceMetricKind, pairing: Pairing, combine: MaskCombine) -> Option<f64> {
    if pairing == Pairing::Window(0) {
        return None;
    }
    let kept = kept_slices(mask);
    if kept.len() < 2 {
        return None;
    }
    let c = crop(vol, mask, &kept, true)?;
    let mut values = vec![];
    for i in 0..kept.len() {
        for j in i + 1..kept.len() {
            if let Pairing::Window(k) = pairing {
                if kept[j] - kept[i] > k {
                    continue;
                }
            }
            let (mut a, mut b) = (vec![], vec![]);
            for p in 0..c.rows[i].len() {
                let (mi, mj) = (c.inside[i][p], c.inside[j][p]);
                let keep = match combine {
                    MaskCombine::None => true,
                    MaskCombine::Union => mi || mj,
                    MaskCombine::Intersection => mi && mj,
                };
                if keep {
                    a.push(c.rows[i][p]);
                    b.push(c.rows[j][p]);
                }
            }
            if let Some(v) = pair_metric(kind, &a, &b) {
                values.push(v);
            }
        }
    }
    (!values.is_empty()).then(|| mean(&values))
}

/// `[mean, median, std, p05, p95, cov, kurtosis, mad]` of a sample.
pub fn summary(values: &[f64]) -> Option<[f64; 8]> {
    if values.is_empty() {
        return None;
    }
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let pct = |s: &[f64], q: f64| {
        let pos = q / 100.0 * (s.len() - 1) as f64;
        let (i, f) = (pos.floor() as usize, pos - pos.floor());
        if i + 1 < s.len() {
            s[i] + f * (s[i + 1] - s[i])
        } else {
            s[i]
        }
    };
    let m = mean(values);
    let var = pop_var(values);
    let std = var.sqrt();
    let m4 = values.iter().map(|v| (v - m).powi(4)).sum::<f64>() / values.len() as f64;
    let kurt = if var > 0.0 { m4 / (var * var) - 3.0 } else { f64::NAN };
    let cov = if std == 0.0 {
        0.0
    } else if m != 0.0 {
        std / m
    } else {
        f64::NAN
    };
    let med = pct(&s, 50.0);
    let mut dev: Vec<f64> = s.iter().map(|v| (v - med).abs()).collect();
    dev.sort_by(f64::total_cmp);
    Some([m, med, std, pct(&s, 5.0), pct(&s, 95.0), cov, kurt, pct(&dev, 50.0)])
}

pub fn masked_values(vol: &Volume, mask: &Mask) -> Vec<f64> {
    let [nx, ny, nz] = vol.dims();
    let mut out = vec![];
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                if mask.get(x, y, z) {
                    out.push(vol.get(x, y, z));
                }
            }
        }
    }
    out
}

/// Histogram entropy in bits over `[min, max]` of the sample.
pub fn entropy(values: &[f64], bins: usize) -> Option<f64> {
    if values.is_empty() || bins == 0 {
        return None;
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut counts = vec![0usize; bins];
    for &v in values {
        counts[bin(v, lo, hi, bins)] += 1;
    }
    Some(entropy_of(&counts))
}

/// Population variance of the slice centroids in mm, summed over x and y.
pub fn centroid_stat(mask: &Mask, spacing: [f64; 3], center_only: bool) -> Option<f64> {
    let kept = kept_slices(mask);
    let sl = if center_only { center_third(&kept) } else { kept };
    let [nx, ny, _] = mask.dims();
    let (mut xs, mut ys) = (vec![], vec![]);
    for &z in &sl {
        let pts: Vec<(usize, usize)> = (0..ny).flat_map(|y| (0..nx).map(move |x| (x, y))).filter(|&(x, y)| mask.get(x, y, z)).collect();
        xs.push(pts.iter().map(|p| p.0 as f64 * spacing[0]).sum::<f64>() / pts.len() as f64);
        ys.push(pts.iter().map(|p| p.1 as f64 * spacing[1]).sum::<f64>() / pts.len() as f64);
    }
    (xs.len() >= 2).then(|| pop_var(&xs) + pop_var(&ys))
}

/// Closing along z by a centred line of `2 · (len / 2) + 1` voxels, on the
/// slab spanned by the mask embedded in an infinite empty grid: erosion of the
/// dilation, both evaluated pointwise.
pub fn closing_diff(mask: &Mask, len: usize, center_only: bool) -> Option<f64> {
    let kept = kept_slices(mask);
    let (&z0, &zl) = (kept.first()?, kept.last()?);
    let z1 = zl + 1;
    if z1 - z0 < len {
        return None;
    }
    let half = (len / 2) as i64;
    let [nx, ny, _] = mask.dims();
    let inside = |x: usize, y: usize, z: i64| z >= z0 as i64 && z < z1 as i64 && mask.get(x, y, z as usize);
    let dilated = |x: usize, y: usize, z: i64| (-half..=half).any(|d| inside(x, y, z + d));
    let closed = |x: usize, y: usize, z: i64| (-half..=half).all(|d| dilated(x, y, z + d));
    let range: Vec<usize> = (z0..z1).collect();
    let counted = if center_only { center_third(&range) } else { range };
    let (mut orig, mut added) = (0usize, 0usize);
    for &z in &counted {
        for y in 0..ny {
            for x in 0..nx {
                let o = mask.get(x, y, z);
                orig += usize::from(o);
                added += usize::from(!o && closed(x, y, z as i64));
            }
        }
    }
    Some(added as f64 / orig as f64)
}

pub fn mask_volume(mask: &Mask, spacing: [f64; 3]) -> f64 {
    let mut n = 0usize;
    let [nx, ny, nz] = mask.dims();
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                n += usize::from(mask.get(x, y, z));
            }
        }
    }
    n as f64 * spacing[0] * spacing[1] * spacing[2]
}

/// Intensities of tissue `t` in the chosen slices (all when `None`).
pub fn region_values(vol: &Volume, seg: &TissueMap, t: Tissue, slices: Option<&[usize]>) -> Vec<f64> {
    let [nx, ny, nz] = vol.dims();
    let mut out = vec![];
    for z in 0..nz {
        if slices.is_some_and(|s| !s.contains(&z)) {
            continue;
        }
        for y in 0..ny {
            for x in 0..nx {
                if seg.data()[x + nx * (y + ny * z)] == t {
                    out.push(vol.get(x, y, z));
                }
            }
        }
    }
    out
}

/// Mean over the Bessel-corrected standard deviation.
pub fn snr(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let m = mean(values);
    let s = (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64).sqrt();
    (s > 0.0).then(|| m / s)
}

/// `(cnr, cjv)` from the background, GM and WM samples.
pub fn cnr_cjv(bg: &[f64], gm: &[f64], wm: &[f64]) -> (Option<f64>, Option<f64>) {
    if gm.is_empty() || wm.is_empty() {
        return (None, None);
    }
    let (mg, mw) = (mean(gm), mean(wm));
    let (sg, sw) = (pop_var(gm).sqrt(), pop_var(wm).sqrt());
    let cnr = if bg.is_empty() {
        None
    } else {
        let d = (pop_var(bg) + sw * sw + sg * sg).sqrt();
        (d > 0.0).then(|| (mw - mg).abs() / d)
    };
    let cjv = (mw != mg).then(|| (sw + sg) / (mw - mg).abs());
    (cnr, cjv)
}

/// WM mean over the 99.95th percentile of the whole image.
pub fn wm2max(image: &[f64], wm: &[f64]) -> Option<f64> {
    if wm.is_empty() {
        return None;
    }
    let mut s = image.to_vec();
    s.sort_by(f64::total_cmp);
    if s.is_empty() || s[0] == s[s.len() - 1] {
        return None;
    }
    let pos = 0.9995 * (s.len() - 1) as f64;
    let (i, f) = (pos.floor() as usize, pos - pos.floor());
    let p = if i + 1 < s.len() { s[i] + f * (s[i + 1] - s[i]) } else { s[i] };
    (p != 0.0).then(|| mean(wm) / p)
}

/// Pearson correlation; `None` for fewer than two samples or a constant side.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() < 2 {
        return None;
    }
    let (ma, mb) = (mean(a), mean(b));
    let sab: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let saa: f64 = a.iter().map(|x| (x - ma) * (x - ma)).sum();
    let sbb: f64 = b.iter().map(|y| (y - mb) * (y - mb)).sum();
    (saa > 0.0 && sbb > 0.0).then(|| (sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Midranks (1-based) by counting smaller and equal values.
pub fn midranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&x| {
            let less = v.iter().filter(|&&y| y < x).count() as f64;
            let eq = v.iter().filter(|&&y| y == x).count() as f64;
            less + (eq + 1.0) / 2.0
        })
        .collect()
}

pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    pearson(&midranks(a), &midranks(b))
}

/// AUC as the fraction of (include, exclude) pairs ordered correctly, ties
/// counting one half.
pub fn auc(y: &[u8], score: &[f64]) -> Option<f64> {
    let (mut good, mut pairs) = (0.0, 0usize);
    for (i, &yi) in y.iter().enumerate() {
        for (j, &yj) in y.iter().enumerate() {
            if yi == 1 && yj == 0 {
                pairs += 1;
                good += if score[i] > score[j] {
                    1.0
                } else if score[i] == score[j] {
                    0.5
                } else {
                    0.0
                };
            }
        }
    }
    (pairs > 0).then(|| good / pairs as f64)
}

/// `(weighted F1, precision, recall)` of the include class at `score >= thr`.
pub fn f1_precision_recall(y: &[u8], score: &[f64], thr: f64) -> (f64, f64, f64) {
    let pred: Vec<u8> = score.iter().map(|&s| u8::from(s >= thr)).collect();
    let per_class = |k: u8| {
        let tp = y.iter().zip(&pred).filter(|(&t, &p)| t == k && p == k).count() as f64;
        let pp = pred.iter().filter(|&&p| p == k).count() as f64;
        let ap = y.iter().filter(|&&t| t == k).count() as f64;
        let p = if pp > 0.0 { tp / pp } else { 0.0 };
        let r = if ap > 0.0 { tp / ap } else { 0.0 };
        let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
        (f, p, r, ap)
    };
    let (f0, _, _, n0) = per_class(0);
    let (f1, p1, r1, n1) = per_class(1);
    ((f0 * n0 + f1 * n1) / (n0 + n1), p1, r1)
}

pub fn r2(y: &[f64], pred: &[f64]) -> Option<f64> {
    let m = mean(y);
    let sst: f64 = y.iter().map(|v| (v - m).powi(2)).sum();
    let sse: f64 = y.iter().zip(pred).map(|(a, b)| (a - b).powi(2)).sum();
    (sst > 0.0).then(|| 1.0 - sse / sst)
}

pub fn mae(y: &[f64], pred: &[f64]) -> f64 {
    y.iter().zip(pred).map(|(a, b)| (a - b).abs()).sum::<f64>() / y.len() as f64
}

/// Cohen's κ from the 2×2 contingency table.
pub fn kappa(a: &[u8], b: &[u8]) -> Option<f64> {
    let n = a.len() as f64;
    let mut t = [[0.0; 2]; 2];
    for (&x, &y) in a.iter().zip(b) {
        t[x as usize][y as usize] += 1.0;
    }
    let po = (t[0][0] + t[1][1]) / n;
    let pe = ((t[0][0] + t[0][1]) * (t[0][0] + t[1][0]) + (t[1][0] + t[1][1]) * (t[0][1] + t[1][1])) / (n * n);
    (pe < 1.0).then(|| (po - pe) / (1.0 - pe))
}
