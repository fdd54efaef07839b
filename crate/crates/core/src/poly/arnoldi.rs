use nalgebra::DMatrix;

use super::{PolyKind, PolySolver};
use crate::error::{Error, Result};
use crate::seeds::random_unit_vector;
use crate::sparse::{dot, norm2, SparseMatrix};

/// Subdiagonal entries below this fraction of the largest Hessenberg column
/// norm seen so far count as a lucky breakdown.
const BREAKDOWN_TOL: f64 = 1e-14;

const REORTH_RATIO: f64 = 0.7;

/// Modified Gram-Schmidt Arnoldi from a unit start vector.
#[derive(Debug, Clone)]
pub struct ArnoldiProcess {
    /// `(steps + 1) x steps` upper Hessenberg matrix.
    pub h: DMatrix<f64>,
    pub steps: usize,
    pub breakdown: bool,
    /// Monomial coefficients of each basis vector: `v_j = sum_k c_j[k] A^k v_0`.
    pub basis_coeffs: Vec<Vec<f64>>,
}

impl ArnoldiProcess {
    pub fn run(
        a: &SparseMatrix,
        v0: &[f64],
        max_steps: usize,
        track_coeffs: bool,
    ) -> Result<Self> {
        let n = a.nrows();
        if !a.is_square() || v0.len() != n {
            return Err(Error::dims("arnoldi", "matrix must be square and match the start vector"));
        }
        let mut h = DMatrix::<f64>::zeros(max_steps + 1, max_steps);
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_steps + 1);
        basis.push(v0.to_vec());
        let mut coeffs: Vec<Vec<f64>> = Vec::new();
        if track_coeffs {
            coeffs.push(vec![1.0 / norm2(v0)]);
        }
        let mut running_max = 0.0_f64;
        let mut steps = 0;
        let mut breakdown = false;
        let mut w = vec![0.0; n];
        for j in 0..max_steps {
            a.spmv_into(&basis[j], &mut w);
            let before = norm2(&w);
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(&w, v);
                h[(i, j)] = hij;
                w.iter_mut().zip(v).for_each(|(w, v)| *w -= hij * v);
            }
            let mut sub = norm2(&w);
            // heavy cancellation: one more pass restores orthogonality
            if sub < REORTH_RATIO * before {
                for (i, v) in basis.iter().enumerate() {
                    let c = dot(&w, v);
                    h[(i, j)] += c;
                    w.iter_mut().zip(v).for_each(|(w, v)| *w -= c * v);
                }
                sub = norm2(&w);
            }
            h[(j + 1, j)] = sub;
            steps = j + 1;
            let col_norm = (0..=j + 1).map(|i| h[(i, j)] * h[(i, j)]).sum::<f64>().sqrt();
            running_max = running_max.max(col_norm);

            if track_coeffs {
                let mut c = vec![0.0; j + 2];
                for (k, ck) in coeffs[j].iter().enumerate() {
                    c[k + 1] += ck;
                }
                for (i, ci) in coeffs.iter().enumerate() {
                    let hij = h[(i, j)];
                    for (k, v) in ci.iter().enumerate() {
                        c[k] -= hij * v;
                    }
                }
                if sub > 0.0 {
                    c.iter_mut().for_each(|x| *x /= sub);
                }
                coeffs.push(c);
            }

            if sub <= BREAKDOWN_TOL * running_max {
                h[(j + 1, j)] = 0.0;
                breakdown = true;
                break;
            }
            basis.push(w.iter().map(|x| x / sub).collect());
        }
        let h = h.view((0, 0), (steps + 1, steps)).into_owned();
        if track_coeffs {
            coeffs.truncate(steps + 1);
        }
        Ok(ArnoldiProcess { h, steps, breakdown, basis_coeffs: coeffs })
    }

    /// Solves `min ||e_1 - H y||` with Givens rotations. Returns `y` and the
    /// GMRES residual norm after each step.
    pub fn least_squares(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let k = self.steps;
        let mut r = self.h.clone();
        let mut g = vec![0.0; k + 1];
        g[0] = 1.0;
        let mut history = Vec::with_capacity(k);
        for j in 0..k {
            let (x, y) = (r[(j, j)], r[(j + 1, j)]);
            let rho = x.hypot(y);
            let (c, s) = if rho == 0.0 { (1.0, 0.0) } else { (x / rho, y / rho) };
            for col in j..k {
                let (p, q) = (r[(j, col)], r[(j + 1, col)]);
                r[(j, col)] = c * p + s * q;
                r[(j + 1, col)] = -s * p + c * q;
            }
            let (p, q) = (g[j], g[j + 1]);
            g[j] = c * p + s * q;
            g[j + 1] = -s * p + c * q;
            history.push(g[j + 1].abs());
        }
        let scale = (0..k).map(|j| r[(j, j)].abs()).fold(0.0, f64::max);
        let mut y = vec![0.0; k];
        for j in (0..k).rev() {
            let d = r[(j, j)];
            if d.abs() <= 1e-15 * scale || d == 0.0 {
                return Err(Error::Polynomial(format!(
                    "singular Hessenberg least-squares system at step {}",
                    j + 1
                )));
            }
            let mut acc = g[j];
            for col in j + 1..k {
                acc -= r[(j, col)] * y[col];
            }
            y[j] = acc / d;
        }
        Ok((y, history))
    }
}

/// Order-`order` GMRES polynomial in monomial form from `order + 1` Arnoldi
/// steps on a random unit right-hand side keyed by `seed`.
pub fn gmres_poly_arnoldi(a: &SparseMatrix, order: usize, seed: u64) -> Result<PolySolver> {
    if !a.is_square() {
        return Err(Error::dims("gmres_poly_arnoldi", "matrix is not square"));
    }
    if a.nrows() == 0 {
        return Err(Error::Polynomial("empty matrix".into()));
    }
    if a.values().iter().all(|&v| v == 0.0) {
        return Err(Error::Polynomial("zero matrix has no inverse".into()));
    }
    let b = random_unit_vector(a.nrows(), seed);
    let arn = ArnoldiProcess::run(a, &b, order + 1, true)?;
    let (y, history) = arn.least_squares()?;
    let k = arn.steps;
    let mut coeffs = vec![0.0; k];
    for (j, yj) in y.iter().enumerate() {
        for (d, c) in arn.basis_coeffs[j].iter().enumerate() {
            coeffs[d] += yj * c;
        }
    }
    let poly = PolySolver {
        kind: PolyKind::ArnoldiCoeff,
        order,
        effective_order: k - 1,
        coeffs,
        roots: Vec::new(),
        inv_diag: None,
        generating_residuals: history,
    };
    poly.validate()?;
    Ok(poly)
}
