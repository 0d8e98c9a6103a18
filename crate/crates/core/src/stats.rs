//! Descriptive statistics shared by the metric families.

use alloc::vec::Vec;

use crate::num;

/// Arithmetic mean, kept within the data range so that constant inputs give
/// their value exactly.
pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let m = values.iter().sum::<f64>() / values.len() as f64;
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if m < lo {
        lo
    } else if m > hi {
        hi
    } else {
        m
    }
}

/// Population variance (divides by `n`).
pub fn variance(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64
}

pub fn std_dev(values: &[f64]) -> f64 {
    num::sqrt(variance(values))
}

pub fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Percentile `q` in [0, 100] of already sorted data, linear interpolation
/// between closest ranks.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    let pos = q / 100.0 * (n - 1) as f64;
    let lo = num::floor(pos) as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub fn percentile(values: &[f64], q: f64) -> f64 {
    percentile_sorted(&sorted(values), q)
}

pub fn median(values: &[f64]) -> f64 {
    percentile(values, 50.0)
}

/// Pearson correlation; `None` when either side has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    debug_assert_eq!(a.len(), b.len());
    if a.len() < 2 {
        return None;
    }
    let ma = mean(a);
    let mb = mean(b);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let dx = x - ma;
        let dy = y - mb;
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return None;
    }
    Some((sab / num::sqrt(saa * sbb)).clamp(-1.0, 1.0))
}

/// 1-based ranks with ties replaced by their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = alloc::vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j (0-based) share rank mean((i+1)..=j)
        let r = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = r;
        }
        i = j;
    }
    ranks
}

/// Shannon entropy in bits of a histogram of counts.
pub fn entropy_bits(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    let mut h = 0.0;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / t;
            h -= p * num::log2(p);
        }
    }
    h
}

/// Bin index of `v` in `bins` equal-width bins spanning `[lo, hi]`.
#[inline]
pub fn bin_index(v: f64, lo: f64, hi: f64, bins: usize) -> usize {
    if hi <= lo {
        return 0;
    }
    let b = ((v - lo) / (hi - lo) * bins as f64) as usize;
    b.min(bins - 1)
}

/// Location, spread and shape of the intensities inside a region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    pub mean: f64,
    pub median: f64,
    pub std: f64,
    pub p05: f64,
    pub p95: f64,
    /// Coefficient of variation, `std / mean`.
    pub cov: f64,
    /// Fisher (excess) kurtosis; a Gaussian gives 0.
    pub kurtosis: f64,
    /// Median absolute deviation from the median.
    pub mad: f64,
    pub n: usize,
}

impl SummaryStats {
    /// Statistics of a nonempty sample. Returns `None` for an empty sample.
    ///
    /// Kurtosis and the coefficient of variation are NaN when undefined
    /// (constant sample, or zero mean with nonzero spread).
    pub fn from_values(values: &[f64]) -> Option<SummaryStats> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let s = sorted(values);
        let mean = mean(values);
        let (mut m2, mut m4) = (0.0, 0.0);
        for v in values {
            let d = v - mean;
            let d2 = d * d;
            m2 += d2;
            m4 += d2 * d2;
        }
        m2 /= n as f64;
        m4 /= n as f64;
        let std = num::sqrt(m2);
        let kurtosis = if m2 > 0.0 { m4 / (m2 * m2) - 3.0 } else { f64::NAN };
        let cov = if std == 0.0 {
            0.0
        } else if mean != 0.0 {
            std / mean
        } else {
            f64::NAN
        };
        let median = percentile_sorted(&s, 50.0);
        let mut dev: Vec<f64> = s.iter().map(|v| num::abs(v - median)).collect();
        dev.sort_by(f64::total_cmp);
        Some(SummaryStats {
            mean,
            median,
            std,
            p05: percentile_sorted(&s, 5.0),
            p95: percentile_sorted(&s, 95.0),
            cov,
            kurtosis,
            mad: percentile_sorted(&dev, 50.0),
            n,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_values_have_zero_spread() {
        for v in [9.484192548104826, 0.1, 1.2645590064139767 * 7.5, -3.3e-7] {
            for n in [3, 7, 1000] {
                let s = SummaryStats::from_values(&alloc::vec![v; n]).unwrap();
                assert_eq!((s.mean, s.std), (v, 0.0));
            }
        }
    }

    #[test]
    fn hand_evaluated_one_to_five() {
        let s = SummaryStats::from_values(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(s.mean, 3.0);
        assert_eq!(s.median, 3.0);
        assert_eq!(s.mad, 1.0);
        assert_eq!(s.n, 5);
        assert!((s.p05 - 1.2).abs() < 1e-12);
        assert!((s.p95 - 4.8).abs() < 1e-12);
        // m2 = 2, m4 = (16+1+0+1+16)/5 = 6.8 -> 6.8/4 - 3
        assert!((s.kurtosis - (1.7 - 3.0)).abs() < 1e-12);
    }

    #[test]
    fn constant_sample() {
        let s = SummaryStats::from_values(&[5.0; 7]).unwrap();
        assert_eq!((s.mean, s.std, s.cov, s.p05, s.p95), (5.0, 0.0, 0.0, 5.0, 5.0));
        assert!(s.kurtosis.is_nan());
        assert!(SummaryStats::from_values(&[]).is_none());
    }

    #[test]
    fn midranks() {
        assert_eq!(average_ranks(&[10.0, 20.0, 10.0, 30.0]), alloc::vec![1.5, 3.0, 1.5, 4.0]);
    }

    #[test]
    fn entropy_of_uniform_histogram() {
        assert!((entropy_bits(&[3; 128]) - 7.0).abs() < 1e-12);
        assert_eq!(entropy_bits(&[0, 9, 0]), 0.0);
    }
}
