use super::{PolyKind, PolySolver};
use crate::error::{Error, Result};
use crate::sparse::{spgemm_fixed_sparsity, SparseMatrix};

/// Assembles `sum_k alpha_k A~^k` where `A~^0 = I`, `A~^1 = A` and every
/// higher power is masked to the structure of `A` plus its diagonal after
/// each multiplication. The result never leaves that structure.
///
/// Neumann polynomials are assembled in `D^{-1} A` and then right-scaled by
/// `D^{-1}`.
pub fn assemble_fixed_sparsity(p: &PolySolver, a: &SparseMatrix) -> Result<SparseMatrix> {
    if p.kind == PolyKind::NewtonRoots {
        return Err(Error::Unsupported(
            "fixed-sparsity assembly needs a coefficient-form polynomial".into(),
        ));
    }
    if !a.is_square() {
        return Err(Error::dims("assemble_fixed_sparsity", "matrix is not square"));
    }
    let base = match &p.inv_diag {
        Some(d) => a.scale_rows(d)?,
        None => a.clone(),
    };
    let pattern = base.pattern_with_diagonal()?;
    let n = a.nrows();

    let mut out = SparseMatrix::from_diagonal(&vec![p.coeffs.first().copied().unwrap_or(0.0); n]);
    let mut power: Option<SparseMatrix> = None;
    for &alpha in p.coeffs.iter().skip(1) {
        let next = match &power {
            None => base.clone(),
            Some(prev) => spgemm_fixed_sparsity(prev, &base, &pattern)?,
        };
        out = out.add_scaled(&next, alpha)?;
        power = Some(next);
    }
    match &p.inv_diag {
        Some(d) => out.scale_cols(d),
        None => Ok(out),
    }
}
