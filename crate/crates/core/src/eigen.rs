//! Eigenvalues of real symmetric matrices.
//!
//! Householder reduction to tridiagonal form followed by the implicit QL
//! iteration. Row updates run through [`crate::par`]; every row is computed
//! the same way regardless of thread count, so results are bitwise
//! reproducible.

use crate::error::{Error, Result};
use crate::par;

/// QL sweeps allowed per eigenvalue.
const MAX_SWEEPS: usize = 30;

/// Ascending eigenvalues of the symmetric `n × n` row-major matrix `a`.
/// Only symmetry of the input is assumed; `a` is overwritten.
pub fn symmetric_eigenvalues(a: &mut [f64], n: usize) -> Result<Vec<f64>> {
    assert_eq!(a.len(), n * n, "matrix storage does not match its order");
    let (d, e) = tridiagonalize(a, n);
    tridiagonal_eigenvalues(d, e)
}

/// Reduces `a` to tridiagonal form by Householder reflections.
///
/// Returns the diagonal and the superdiagonal, the latter padded with a
/// trailing zero to length `n`. The contents of `a` are destroyed.
pub fn tridiagonalize(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut e = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let lo = k + 1;
        let m = n - lo;
        // x = A[k, k+1..]; by symmetry this is the column below the diagonal
        let x = &a[k * n + lo..k * n + n];
        let alpha = x[0];
        let tail = x[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if tail == 0.0 {
            e[k] = alpha;
            continue;
        }
        let beta = -alpha.signum() * alpha.hypot(tail);
        let tau = (beta - alpha) / beta;
        let scale = 1.0 / (alpha - beta);
        let mut v = Vec::with_capacity(m);
        v.push(1.0);
        v.extend(x[1..].iter().map(|xi| xi * scale));
        e[k] = beta;

        let rows = &a[lo * n..];
        let p: Vec<f64> = par::map_indexed(m, |i| {
            let row = &rows[i * n + lo..i * n + n];
            tau * dot(row, &v)
        });
        let kappa = 0.5 * tau * dot(&p, &v);
        let w: Vec<f64> = p.iter().zip(&v).map(|(pi, vi)| pi - kappa * vi).collect();
        par::for_each_chunk_mut(&mut a[lo * n..], n, |i, row| {
            let (vi, wi) = (v[i], w[i]);
            for ((r, vj), wj) in row[lo..].iter_mut().zip(&v).zip(&w) {
                *r -= vi * wj + wi * vj;
            }
        });
    }
    if n >= 2 {
        e[n - 2] = a[(n - 2) * n + n - 1];
    }
    let d = (0..n).map(|i| a[i * n + i]).collect();
    (d, e)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four accumulators let the compiler vectorize without reassociating
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for l in 0..4 {
            acc[l] += a[4 * c + l] * b[4 * c + l];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// Ascending eigenvalues of the symmetric tridiagonal matrix with diagonal
/// `d` and off-diagonal `e[i] = T(i, i+1)`; `e` has length `n` and its last
/// entry is ignored.
pub fn tridiagonal_eigenvalues(mut d: Vec<f64>, mut e: Vec<f64>) -> Result<Vec<f64>> {
    let n = d.len();
    assert_eq!(e.len(), n, "off-diagonal must be padded to the matrix order");
    if n == 0 {
        return Ok(d);
    }
    e[n - 1] = 0.0;
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_SWEEPS {
                    return Err(Error::EigenNonConvergence { index: l });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in &mut d[l + 2..] {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let (mut c, mut c2, mut c3) = (1.0, 1.0, 1.0);
                let el1 = e[l + 1];
                let (mut s, mut s2) = (0.0, 0.0);
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}
