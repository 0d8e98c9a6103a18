//! Small dense linear algebra: symmetric eigenvalues and SPD solves.
//!
//! Matrices are row-major `Vec<f64>` with an explicit size.

use alloc::vec::Vec;

use crate::num;

/// Eigenvalues of a symmetric `n x n` matrix by cyclic Jacobi rotations,
/// sorted in decreasing order.
pub fn symmetric_eigenvalues(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    assert_eq!(a.len(), n * n);
    let frob: f64 = a.iter().map(|v| v * v).sum();
    if frob == 0.0 {
        return alloc::vec![0.0; n];
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off <= 1e-30 * frob {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + num::sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + num::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / num::sqrt(1.0 + t * t);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

/// Solves `A x = b` for symmetric positive definite `A` by Cholesky
/// factorisation. Returns `None` when a pivot falls below `rel_tol` times the
/// largest diagonal entry (numerically rank deficient).
pub fn cholesky_solve(a: &[f64], b: &[f64], n: usize, rel_tol: f64) -> Option<Vec<f64>> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    let max_diag = (0..n).map(|i| a[i * n + i]).fold(0.0, f64::max);
    if max_diag <= 0.0 {
        return None;
    }
    let mut l = alloc::vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d <= rel_tol * max_diag {
            return None;
        }
        let d = num::sqrt(d);
        l[j * n + j] = d;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    let mut y = alloc::vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = alloc::vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    Some(x)
}
