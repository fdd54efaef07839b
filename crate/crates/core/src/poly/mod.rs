//! Polynomial approximations of a matrix inverse.
//!
//! Three constructions share one representation and one application engine:
//!
//! * GMRES polynomials in monomial coefficient form, built from an Arnoldi
//!   run on a random right-hand side ([`gmres_poly_arnoldi`]);
//! * high-order GMRES polynomials in factored Newton form over the harmonic
//!   Ritz values ([`gmres_poly_newton`]);
//! * truncated Neumann series in `D^{-1} A` ([`neumann_poly`]).
//!
//! Application is matrix-free and uses only SpMVs and vector updates.
//! Coefficient forms can also be assembled with the sparsity of `A` fixed
//! ([`assemble_fixed_sparsity`]).

mod arnoldi;
mod assemble;
mod newton;
mod neumann;

pub use arnoldi::{gmres_poly_arnoldi, ArnoldiProcess};
pub use assemble::assemble_fixed_sparsity;
pub use newton::{gmres_poly_newton, gmres_poly_newton_with, leja_order, NewtonOptions};
pub use neumann::neumann_poly;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolyKind {
    ArnoldiCoeff,
    NewtonRoots,
    Neumann,
}

/// A root of the GMRES residual polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub re: f64,
    pub im: f64,
}

impl Root {
    pub fn real(re: f64) -> Self {
        Root { re, im: 0.0 }
    }

    pub fn is_real(&self) -> bool {
        self.im == 0.0
    }

    pub fn modulus_sq(&self) -> f64 {
        self.re * self.re + self.im * self.im
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolySolver {
    pub kind: PolyKind,
    /// Requested polynomial degree.
    pub order: usize,
    /// Degree actually achieved after breakdown or rank truncation.
    pub effective_order: usize,
    /// Monomial coefficients, lowest degree first (coefficient and Neumann kinds).
    pub coeffs: Vec<f64>,
    /// Leja-ordered roots with conjugate pairs adjacent (Newton kind). May
    /// include added copies beyond `effective_order + 1`.
    pub roots: Vec<Root>,
    /// Neumann kind: the polynomial acts on `D^{-1} A` after scaling the input by `D^{-1}`.
    pub inv_diag: Option<Vec<f64>>,
    /// Residual norms of the generating GMRES run, one per Arnoldi step.
    pub generating_residuals: Vec<f64>,
}

/// Scratch vectors reused across applications.
#[derive(Debug, Default, Clone)]
pub struct PolyWork {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl PolyWork {
    fn ensure(&mut self, n: usize) {
        for v in [&mut self.a, &mut self.b, &mut self.c] {
            if v.len() != n {
                v.resize(n, 0.0);
            }
        }
    }
}

/// Scaled intermediate vectors are kept within this band.
const SCALE_HI: f64 = 1e150;
const SCALE_LO: f64 = 1e-150;

impl PolySolver {
    /// The constant polynomial `c`.
    pub fn constant(c: f64) -> Self {
        PolySolver {
            kind: PolyKind::ArnoldiCoeff,
            order: 0,
            effective_order: 0,
            coeffs: vec![c],
            roots: Vec::new(),
            inv_diag: None,
            generating_residuals: Vec::new(),
        }
    }

    /// SpMVs with `A` needed by one matrix-free application.
    pub fn spmv_count(&self) -> usize {
        match self.kind {
            PolyKind::ArnoldiCoeff | PolyKind::Neumann => self.coeffs.len().saturating_sub(1),
            PolyKind::NewtonRoots => {
                let mut count = 0;
                let mut i = 0;
                while i < self.roots.len() {
                    if self.roots[i].is_real() {
                        count += usize::from(i + 1 < self.roots.len());
                        i += 1;
                    } else {
                        count += if i + 2 < self.roots.len() { 2 } else { 1 };
                        i += 2;
                    }
                }
                count
            }
        }
    }

    /// Floating-point operations of one application on a matrix with `nnz`
    /// stored entries and `n` rows: 2 per stored entry per SpMV, 2 per entry
    /// for each axpy or scale.
    pub fn apply_flops(&self, nnz: usize, n: usize) -> u64 {
        let (nnz, n) = (nnz as u64, n as u64);
        match self.kind {
            PolyKind::ArnoldiCoeff | PolyKind::Neumann => {
                let d = self.coeffs.len().saturating_sub(1) as u64;
                // initial scale, then per degree one SpMV plus one axpy
                let mut f = 2 * n + d * (2 * nnz + 2 * n);
                if self.inv_diag.is_some() {
                    // input scaling plus one diagonal scaling per SpMV
                    f += 2 * n + d * 2 * n;
                }
                f
            }
            PolyKind::NewtonRoots => {
                let mut f = 0u64;
                let mut i = 0;
                let m = self.roots.len();
                while i < m {
                    if self.roots[i].is_real() {
                        f += 2 * n; // y += p / theta
                        if i + 1 < m {
                            f += 2 * nnz + 2 * n;
                        }
                        i += 1;
                    } else {
                        // tmp = A p; w = 2a p - tmp; y += w / |theta|^2
                        f += 2 * nnz + 2 * n + 2 * n;
                        if i + 2 < m {
                            // p -= A w / |theta|^2
                            f += 2 * nnz + 2 * n;
                        }
                        i += 2;
                    }
                }
                f
            }
        }
    }

    /// `q(A) b`, matrix-free.
    pub fn apply(&self, a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
        if !a.is_square() || a.nrows() != b.len() {
            return Err(Error::dims(
                "poly apply",
                format!("{}x{} matrix, vector of length {}", a.nrows(), a.ncols(), b.len()),
            ));
        }
        if let Some(d) = &self.inv_diag {
            if d.len() != b.len() {
                return Err(Error::dims("poly apply", "stored diagonal has wrong length"));
            }
        }
        let mut out = vec![0.0; b.len()];
        self.apply_into(a, b, &mut out, &mut PolyWork::default());
        Ok(out)
    }

    /// Shape-unchecked application into `out`.
    pub fn apply_into(&self, a: &SparseMatrix, b: &[f64], out: &mut [f64], work: &mut PolyWork) {
        let n = b.len();
        work.ensure(n);
        match self.kind {
            PolyKind::ArnoldiCoeff | PolyKind::Neumann => self.apply_horner(a, b, out, work),
            PolyKind::NewtonRoots => self.apply_newton(a, b, out, work),
        }
    }

    fn apply_horner(&self, a: &SparseMatrix, b: &[f64], out: &mut [f64], work: &mut PolyWork) {
        let PolyWork { a: u, b: t, .. } = work;
        match &self.inv_diag {
            Some(d) => u.iter_mut().zip(b.iter().zip(d)).for_each(|(u, (b, d))| *u = b * d),
            None => u.copy_from_slice(b),
        }
        let Some((&top, rest)) = self.coeffs.split_last() else {
            out.iter_mut().for_each(|o| *o = 0.0);
            return;
        };
        out.iter_mut().zip(u.iter()).for_each(|(o, u)| *o = top * u);
        for &c in rest.iter().rev() {
            a.spmv_into(out, t);
            if let Some(d) = &self.inv_diag {
                t.iter_mut().zip(d).for_each(|(t, d)| *t *= d);
            }
            out.iter_mut().zip(t.iter().zip(u.iter())).for_each(|(o, (t, u))| *o = t + c * u);
        }
    }

    fn apply_newton(&self, a: &SparseMatrix, b: &[f64], out: &mut [f64], work: &mut PolyWork) {
        let PolyWork { a: p, b: tmp, c: w } = work;
        p.copy_from_slice(b);
        out.iter_mut().for_each(|o| *o = 0.0);
        // the true product vector is `scale * p`
        let mut scale = 1.0_f64;
        let m = self.roots.len();
        let mut i = 0;
        while i < m {
            let r = self.roots[i];
            if r.is_real() {
                let inv = 1.0 / r.re;
                let s = scale * inv;
                out.iter_mut().zip(p.iter()).for_each(|(o, p)| *o += s * p);
                if i + 1 < m {
                    a.spmv_into(p, tmp);
                    p.iter_mut().zip(tmp.iter()).for_each(|(p, t)| *p -= inv * t);
                }
                i += 1;
            } else {
                let modsq = r.modulus_sq();
                let two_a = 2.0 * r.re;
                a.spmv_into(p, tmp);
                w.iter_mut()
                    .zip(p.iter().zip(tmp.iter()))
                    .for_each(|(w, (p, t))| *w = two_a * p - t);
                let s = scale / modsq;
                out.iter_mut().zip(w.iter()).for_each(|(o, w)| *o += s * w);
                if i + 2 < m {
                    a.spmv_into(w, tmp);
                    p.iter_mut().zip(tmp.iter()).for_each(|(p, t)| *p -= t / modsq);
                }
                i += 2;
            }
            let big = p.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
            if big > SCALE_HI || (big > 0.0 && big < SCALE_LO) {
                p.iter_mut().for_each(|v| *v /= big);
                scale *= big;
            }
        }
    }

    /// `||b - A q(A) b|| / ||b||`.
    pub fn relative_residual(&self, a: &SparseMatrix, b: &[f64]) -> Result<f64> {
        let x = self.apply(a, b)?;
        let ax = a.spmv(&x)?;
        let r: Vec<f64> = b.iter().zip(&ax).map(|(b, ax)| b - ax).collect();
        Ok(crate::sparse::norm2(&r) / crate::sparse::norm2(b))
    }

    /// Sanity checks on the stored representation.
    pub fn validate(&self) -> Result<()> {
        if self.effective_order > self.order {
            return Err(Error::Polynomial("effective order exceeds requested order".into()));
        }
        if self.coeffs.iter().any(|c| !c.is_finite())
            || self.roots.iter().any(|r| !r.re.is_finite() || !r.im.is_finite())
        {
            return Err(Error::Polynomial("non-finite coefficient or root".into()));
        }
        let mut i = 0;
        while i < self.roots.len() {
            let r = self.roots[i];
            if r.is_real() {
                i += 1;
                continue;
            }
            match self.roots.get(i + 1) {
                Some(c) if c.re == r.re && c.im == -r.im => i += 2,
                _ => return Err(Error::Polynomial(format!("root {i} lacks adjacent conjugate"))),
            }
        }
        Ok(())
    }
}
