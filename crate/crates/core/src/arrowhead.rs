// SPDX-License-Identifier: Apache-2.0

//! Eigendecomposition of real symmetric arrowhead matrices
//!
//! ```text
//!     [ apex  z_1  z_2  ...  z_n ]
//!     [ z_1   d_1                ]
//!     [ z_2        d_2           ]
//!     [ ...             ...      ]
//!     [ z_n                  d_n ]
//! ```
//!
//! Eigenvalues are the roots of the secular function
//! `f(x) = x - apex - sum_k z_k^2 / (x - d_k)`, one per interval between
//! consecutive poles `d_k` plus one on each side. Each root is bracketed and
//! bisected in coordinates shifted to its nearest pole, so the differences
//! `x - d_k` keep full relative accuracy. The border is then recomputed from
//! the computed spectrum (Löwner's formula), which makes the eigenvectors
//! `(1, z_k / (x - d_k))` orthogonal to working precision.
//!
//! Zero border entries and (numerically) repeated poles are deflated first.
//! Total cost is O(n^2) plus the dense eigenvector output.

use crate::error::{Error, Result};

/// Spectral decomposition `A = Q diag(values) Q^T`.
#[derive(Debug, Clone)]
pub struct ArrowheadEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Row-major `dim x dim`; column `j` is the eigenvector of `values[j]`.
    pub vectors: Vec<f64>,
}

const MAX_BISECTION_STEPS: usize = 2200;

/// Diagonalizes the arrowhead matrix with the given apex, pole diagonal and
/// border.
pub fn eigh(apex: f64, diag: &[f64], border: &[f64]) -> Result<ArrowheadEigen> {
    let n = diag.len();
    if border.len() != n {
        return Err(Error::InvalidArgument(format!(
            "arrowhead border has {} entries, diagonal has {}",
            border.len(),
            n
        )));
    }
    if !apex.is_finite() || diag.iter().chain(border).any(|v| !v.is_finite()) {
        return Err(Error::Eigensolver("non-finite matrix entry".into()));
    }
    let dim = n + 1;

    let znorm = border.iter().map(|z| z * z).sum::<f64>().sqrt();
    let dmax = diag.iter().fold(apex.abs(), |m, d| m.max(d.abs()));
    let scale = dmax + znorm;
    let tol = 8.0 * f64::EPSILON * scale.max(f64::MIN_POSITIVE);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]).then(i.cmp(&j)));
    let mut d: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut z: Vec<f64> = order.iter().map(|&i| border[i]).collect();

    let mut deflated = vec![false; n];
    for k in 0..n {
        if z[k].abs() <= tol {
            deflated[k] = true;
            z[k] = 0.0;
        }
    }

    // Givens rotations (i, k, c, s) merging pole i into pole k:
    // f_i = c e_i - s e_k (decoupled), f_k = s e_i + c e_k (carries the border).
    let mut rotations: Vec<(usize, usize, f64, f64)> = Vec::new();
    let mut last: Option<usize> = None;
    for k in 0..n {
        if deflated[k] {
            continue;
        }
        if let Some(i) = last {
            let r = z[i].hypot(z[k]);
            let c = z[k] / r;
            let s = z[i] / r;
            if (c * s * (d[k] - d[i])).abs() <= tol {
                let (di, dk) = (d[i], d[k]);
                d[i] = c * c * di + s * s * dk;
                d[k] = s * s * di + c * c * dk;
                z[k] = r;
                z[i] = 0.0;
                deflated[i] = true;
                rotations.push((i, k, c, s));
            }
        }
        last = Some(k);
    }

    let active: Vec<usize> = (0..n).filter(|&k| !deflated[k]).collect();
    let poles: Vec<f64> = active.iter().map(|&k| d[k]).collect();
    let zs: Vec<f64> = active.iter().map(|&k| z[k]).collect();
    let m = active.len();

    // Each root is stored as (shift pole index, offset from that pole).
    let roots = if m == 0 {
        Vec::new()
    } else {
        (0..=m)
            .map(|r| secular_root(apex, &poles, &zs, znorm, tol, r))
            .collect::<Result<Vec<_>>>()?
    };

    // Column data in sorted coordinates: (eigenvalue, vector of length dim).
    let mut columns: Vec<(f64, Vec<f64>)> = Vec::with_capacity(dim);

    if m == 0 {
        let mut v = vec![0.0; dim];
        v[0] = 1.0;
        columns.push((apex, v));
    } else {
        let diff = |i: usize, k: usize| -> f64 {
            let (s, mu) = roots[i];
            mu + (poles[s] - poles[k])
        };

        let mut zhat = vec![0.0; m];
        for k in 0..m {
            let mut prod = -(diff(k, k) * diff(k + 1, k));
            for l in 0..k {
                prod *= diff(l, k) / (poles[l] - poles[k]);
            }
            for l in (k + 1)..m {
                prod *= diff(l + 1, k) / (poles[l] - poles[k]);
            }
            zhat[k] = prod.max(0.0).sqrt().copysign(zs[k]);
        }

        for i in 0..=m {
            let mut v = vec![0.0; dim];
            v[0] = 1.0;
            let mut norm2 = 1.0;
            for k in 0..m {
                let gap = diff(i, k);
                if gap == 0.0 {
                    return Err(Error::Eigensolver(format!(
                        "eigenvalue {i} collided with pole {k}"
                    )));
                }
                let x = zhat[k] / gap;
                v[1 + active[k]] = x;
                norm2 += x * x;
            }
            let inv = norm2.sqrt().recip();
            v.iter_mut().for_each(|x| *x *= inv);
            let (s, mu) = roots[i];
            columns.push((poles[s] + mu, v));
        }
    }

    for k in (0..n).filter(|&k| deflated[k]) {
        let mut v = vec![0.0; dim];
        v[1 + k] = 1.0;
        columns.push((d[k], v));
    }

    columns.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Undo the rotations, last one first.
    for &(i, k, c, s) in rotations.iter().rev() {
        for (_, v) in columns.iter_mut() {
            let (yi, yk) = (v[1 + i], v[1 + k]);
            v[1 + i] = c * yi + s * yk;
            v[1 + k] = -s * yi + c * yk;
        }
    }

    let values: Vec<f64> = columns.iter().map(|c| c.0).collect();
    let mut vectors = vec![0.0; dim * dim];
    for (j, (_, v)) in columns.iter().enumerate() {
        vectors[j] = v[0];
        for k in 0..n {
            vectors[(1 + order[k]) * dim + j] = v[1 + k];
        }
    }

    Ok(ArrowheadEigen { values, vectors })
}

/// Finds root `r` of the secular function, which lies strictly between
/// `poles[r - 1]` and `poles[r]` (unbounded at the ends).
fn secular_root(
    apex: f64,
    poles: &[f64],
    zs: &[f64],
    znorm: f64,
    tol: f64,
    r: usize,
) -> Result<(usize, f64)> {
    let m = poles.len();
    let shifted = |s: usize, mu: f64| -> f64 {
        let base = poles[s];
        let mut acc = mu + (base - apex);
        for (p, z) in poles.iter().zip(zs) {
            acc -= z * z / (mu - (p - base));
        }
        acc
    };

    let (s, mut lo, mut hi) = if r == 0 {
        let lower = apex.min(poles[0]) - znorm - tol;
        (0, (lower - poles[0]).min(-tol), 0.0)
    } else if r == m {
        let upper = apex.max(poles[m - 1]) + znorm + tol;
        (m - 1, 0.0, (upper - poles[m - 1]).max(tol))
    } else {
        let half = 0.5 * (poles[r] - poles[r - 1]);
        if shifted(r - 1, half) >= 0.0 {
            (r - 1, 0.0, half)
        } else {
            (r, -half, 0.0)
        }
    };

    for _ in 0..MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            let mu = if lo != 0.0 && (hi == 0.0 || shifted(s, lo).abs() <= shifted(s, hi).abs()) {
                lo
            } else {
                hi
            };
            return Ok((s, mu));
        }
        let g = shifted(s, mid);
        if g > 0.0 {
            hi = mid;
        } else if g < 0.0 {
            lo = mid;
        } else {
            return Ok((s, mid));
        }
    }
    Err(Error::Eigensolver(format!(
        "secular root {r} did not converge in {MAX_BISECTION_STEPS} bisection steps"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn dense(apex: f64, d: &[f64], z: &[f64]) -> DMatrix<f64> {
        let n = d.len() + 1;
        let mut m = DMatrix::zeros(n, n);
        m[(0, 0)] = apex;
        for k in 0..d.len() {
            m[(k + 1, k + 1)] = d[k];
            m[(0, k + 1)] = z[k];
            m[(k + 1, 0)] = z[k];
        }
        m
    }

    fn check(apex: f64, d: &[f64], z: &[f64], tol: f64) {
        let e = eigh(apex, d, z).unwrap();
        let n = d.len() + 1;
        let q = DMatrix::from_row_slice(n, n, &e.vectors);
        let a = dense(apex, d, z);
        let lam = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(e.values.clone()));
        let recon = &q * lam * q.transpose() - &a;
        let orth = q.transpose() * &q - DMatrix::identity(n, n);
        assert!(recon.amax() <= tol, "reconstruction {:e}", recon.amax());
        assert!(orth.amax() <= tol, "orthogonality {:e}", orth.amax());

        let mut reference: Vec<f64> = a.symmetric_eigen().eigenvalues.iter().copied().collect();
        reference.sort_by(f64::total_cmp);
        for (x, y) in e.values.iter().zip(&reference) {
            assert!((x - y).abs() <= tol, "eigenvalue {x} vs dense {y}");
        }
    }

    #[test]
    fn two_by_two() {
        let e = eigh(1.0, &[1.0], &[0.1]).unwrap();
        assert!((e.values[0] - 0.9).abs() < 1e-15);
        assert!((e.values[1] - 1.1).abs() < 1e-15);
    }

    #[test]
    fn decoupled_matrix_is_diagonal() {
        let e = eigh(1.0, &[1.5, 0.5, 0.7], &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(e.values, vec![0.5, 0.7, 1.0, 1.5]);
        check(1.0, &[1.5, 0.5, 0.7], &[0.0, 0.0, 0.0], 1e-15);
    }

    #[test]
    fn repeated_poles_are_deflated() {
        check(0.3, &[1.0, 1.0, 1.0, 2.0], &[0.2, -0.1, 0.3, 0.05], 1e-13);
        check(1.0, &[1.0, 1.0], &[0.0, 0.4], 1e-13);
    }

    #[test]
    fn bath_like_spectrum() {
        let n = 300;
        let d: Vec<f64> = (0..n).map(|k| 0.1 + 1.8 * k as f64 / (n - 1) as f64).collect();
        let mut z = vec![0.1 / 30.0; n];
        z[n / 2] *= 50.0;
        check(1.0, &d, &z, 1e-12);
    }

    proptest! {
        #[test]
        fn random_arrowheads(
            apex in -2.0f64..2.0,
            entries in proptest::collection::vec((-2.0f64..2.0, -1.0f64..1.0), 1..40),
        ) {
            let d: Vec<f64> = entries.iter().map(|e| e.0).collect();
            let z: Vec<f64> = entries.iter().map(|e| e.1).collect();
            check(apex, &d, &z, 1e-11);
        }
    }
}
