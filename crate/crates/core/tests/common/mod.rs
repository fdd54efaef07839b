//! Independent dense oracles shared by the integration tests.

#![allow(dead_code)]

use airg_core::sparse::SparseMatrix;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn dense(a: &SparseMatrix) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(a.nrows(), a.ncols());
    for i in 0..a.nrows() {
        let (c, v) = a.row(i);
        for (&j, &x) in c.iter().zip(v) {
            m[(i, j)] += x;
        }
    }
    m
}

pub fn dense_solve(a: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
    a.clone().lu().solve(&DVector::from_column_slice(b)).expect("singular oracle system").as_slice().to_vec()
}

/// Forward substitution for a lower-triangular sparse matrix.
pub fn forward_substitution(a: &SparseMatrix, b: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; b.len()];
    for i in 0..a.nrows() {
        let (c, v) = a.row(i);
        let mut s = b[i];
        let mut d = 0.0;
        for (&j, &x_) in c.iter().zip(v) {
            assert!(j <= i, "not lower triangular");
            if j == i {
                d = x_;
            } else {
                s -= x_ * x[j];
            }
        }
        x[i] = s / d;
    }
    x
}

/// Residual norms `||b - A x_k|| / ||b||` of textbook GMRES for `k = 1..=m`:
/// classical Gram-Schmidt Arnoldi, each least-squares problem solved afresh
/// by SVD.
pub fn textbook_gmres_residuals(a: &DMatrix<f64>, b: &[f64], m: usize) -> Vec<f64> {
    let n = a.nrows();
    let b = DVector::from_column_slice(b);
    let beta = b.norm();
    let mut v: Vec<DVector<f64>> = vec![&b / beta];
    let mut h = DMatrix::<f64>::zeros(m + 1, m);
    let mut out = Vec::with_capacity(m);
    for k in 0..m {
        let w0 = a * &v[k];
        let mut w = w0.clone();
        for (i, vi) in v.iter().enumerate() {
            h[(i, k)] = vi.dot(&w0);
        }
        for (i, vi) in v.iter().enumerate() {
            w -= vi * h[(i, k)];
        }
        // second classical pass for orthogonality
        for (i, vi) in v.iter().enumerate() {
            let c = vi.dot(&w);
            h[(i, k)] += c;
            w -= vi * c;
        }
        h[(k + 1, k)] = w.norm();
        let hk = h.view((0, 0), (k + 2, k + 1)).into_owned();
        let mut rhs = DVector::zeros(k + 2);
        rhs[0] = beta;
        let y = hk.clone().svd(true, true).solve(&rhs, 1e-300).unwrap();
        // true residual in the full space
        let basis = DMatrix::from_columns(&v[..=k]);
        let x = basis * y;
        out.push((&b - a * x).norm() / beta);
        if h[(k + 1, k)] == 0.0 || v.len() >= n {
            break;
        }
        v.push(w / h[(k + 1, k)]);
    }
    out
}

/// Random sparse matrix with off-diagonal row sums at most `ratio` times the
/// diagonal, which is positive.
pub fn random_diag_dominant(n: usize, density: f64, ratio: f64, seed: u64) -> SparseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trip = Vec::new();
    for i in 0..n {
        let mut row = Vec::new();
        for j in 0..n {
            if j != i && rng.gen_bool(density) {
                row.push((j, rng.gen_range(-1.0..1.0)));
            }
        }
        let diag: f64 = rng.gen_range(1.0..3.0);
        let sum: f64 = row.iter().map(|(_, v): &(usize, f64)| v.abs()).sum();
        let scale = if sum > 0.0 { ratio * diag / sum } else { 0.0 };
        for (j, v) in row {
            trip.push((i, j, v * scale));
        }
        trip.push((i, i, diag));
    }
    SparseMatrix::from_triplets(n, n, &trip).unwrap()
}

pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den
}
