//! Dense-algebra reference for one OgExtInf step, written with plain nested
//! vectors: explicit sums for R̂, Gauss–Jordan inversion, and the inverse
//! square root of W̃ᵀW̃ by Jacobi eigendecomposition. Shared by test targets.

#![allow(clippy::needless_range_loop)]

use ogica::ogextinf::random_orthogonal;
use ogica::preprocess::{apply_whitening, fit_whitening};
use ogica::simulate::{make_dataset, ExperimentSpec};
use ogica::{DMatrix, DataMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Mat = Vec<Vec<f64>>;

pub fn to_mat(m: &DMatrix<f64>) -> Mat {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let (n, k, p) = (a.len(), b.len(), b[0].len());
    let mut c = vec![vec![0.0; p]; n];
    for i in 0..n {
        for j in 0..p {
            let mut acc = 0.0;
            for l in 0..k {
                acc += a[i][l] * b[l][j];
            }
            c[i][j] = acc;
        }
    }
    c
}

pub fn transpose(a: &Mat) -> Mat {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

pub fn gauss_jordan_inverse(a: &Mat) -> Mat {
    let n = a.len();
    let mut aug: Mat = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| aug[x][col].abs().total_cmp(&aug[y][col].abs())).unwrap();
        aug.swap(col, pivot);
        let p = aug[col][col];
        for v in aug[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let f = aug[r][col];
                let pivot_row = aug[col].clone();
                for (v, pv) in aug[r].iter_mut().zip(pivot_row) {
                    *v -= f * pv;
                }
            }
        }
    }
    aug.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix: (values, vectors as columns).
pub fn jacobi_eigen(a: &Mat) -> (Vec<f64>, Mat) {
    let n = a.len();
    let mut a = a.clone();
    let mut v: Mat = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k][p], v[k][q]);
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

/// M·(MᵀM)^{-1/2}
pub fn orthogonalize(m: &Mat) -> Mat {
    let mtm = matmul(&transpose(m), m);
    let (vals, vecs) = jacobi_eigen(&mtm);
    let n = m.len();
    let mut inv_sqrt = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            inv_sqrt[i][j] = (0..n).map(|k| vecs[i][k] * vecs[j][k] / vals[k].sqrt()).sum();
        }
    }
    matmul(m, &inv_sqrt)
}

pub fn kurtosis_sign(x: &[f64]) -> f64 {
    let t = x.len() as f64;
    let mean = x.iter().sum::<f64>() / t;
    let m2 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / t;
    let m4 = x.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / t;
    if m4 / (m2 * m2) - 3.0 >= 0.0 { 1.0 } else { -1.0 }
}

pub fn stability_sign(x: &[f64]) -> f64 {
    let t = x.len() as f64;
    let sech2 = x.iter().map(|v| 1.0 / v.cosh().powi(2)).sum::<f64>() / t;
    let sq = x.iter().map(|v| v * v).sum::<f64>() / t;
    let ts = x.iter().map(|v| v.tanh() * v).sum::<f64>() / t;
    if sech2 * sq - ts >= 0.0 { 1.0 } else { -1.0 }
}

pub fn oracle_signs(s: &Mat, cutoff: usize) -> Vec<f64> {
    s.iter().map(|row| if row.len() < cutoff { stability_sign(row) } else { kurtosis_sign(row) }).collect()
}

pub fn oracle_r_hat(s: &Mat, signs: &[f64]) -> Mat {
    let (m, t) = (s.len(), s[0].len());
    let mut r = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            let mut acc = 0.0;
            for k in 0..t {
                acc += (s[i][k] + signs[i] * s[i][k].tanh()) * s[j][k];
            }
            r[i][j] = acc / t as f64;
        }
    }
    r
}

pub fn oracle_og_step(w: &Mat, x: &Mat, cutoff: usize) -> Mat {
    let s = matmul(w, x);
    let signs = oracle_signs(&s, cutoff);
    let r = oracle_r_hat(&s, &signs);
    orthogonalize(&matmul(&gauss_jordan_inverse(&r), w))
}

pub fn max_diff(a: &Mat, b: &DMatrix<f64>) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..a.len() {
        for j in 0..a[0].len() {
            d = d.max((a[i][j] - b[(i, j)]).abs());
        }
    }
    d
}

/// Whitened 3-channel mixture of two Laplacian sources and one uniform source.
pub fn problem(samples: usize, seed: u64) -> (DataMatrix, DMatrix<f64>) {
    let spec = ExperimentSpec { n_super: 2, n_sub: 1, samples, seed, runs: 1 };
    let ds = make_dataset(&spec, 0).unwrap();
    let model = fit_whitening(&ds.observed, 0.0).unwrap();
    let white = apply_whitening(&model, &ds.observed).unwrap();
    let w0 = random_orthogonal(3, &mut ChaCha8Rng::seed_from_u64(seed));
    (white, w0)
}
