use super::{PolyKind, PolySolver};
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// Truncated Neumann series `sum_{k=0}^{order} (I - D^{-1} A)^k D^{-1}`.
///
/// Stored as a monomial polynomial in `N = D^{-1} A` acting on `D^{-1} b`:
/// `sum_{k<=order} (I - N)^k = sum_j (-1)^j C(order + 1, j + 1) N^j`.
pub fn neumann_poly(a: &SparseMatrix, order: usize) -> Result<PolySolver> {
    if !a.is_square() {
        return Err(Error::dims("neumann_poly", "matrix is not square"));
    }
    let diag = a.diagonal();
    if let Some(row) = diag.iter().position(|&d| d == 0.0) {
        return Err(Error::ZeroDiagonal { row });
    }
    let inv_diag: Vec<f64> = diag.iter().map(|d| 1.0 / d).collect();
    let coeffs = (0..=order)
        .map(|j| {
            let c = binomial(order + 1, j + 1);
            if j % 2 == 0 {
                c
            } else {
                -c
            }
        })
        .collect();
    Ok(PolySolver {
        kind: PolyKind::Neumann,
        order,
        effective_order: order,
        coeffs,
        roots: Vec::new(),
        inv_diag: Some(inv_diag),
        generating_residuals: Vec::new(),
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c.round()
}
