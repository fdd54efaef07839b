use super::{IndexSet, SparseMatrix};
use crate::error::{Error, Result};

/// Sparse product `A * B` (Gustavson, row by row).
///
/// Accumulation follows A's row order then B's row order, so the result is
/// bitwise reproducible. Cancellation zeros are kept as explicit entries.
pub fn spgemm(a: &SparseMatrix, b: &SparseMatrix) -> Result<SparseMatrix> {
    if a.ncols() != b.nrows() {
        return Err(Error::dims(
            "spgemm",
            format!("{}x{} times {}x{}", a.nrows(), a.ncols(), b.nrows(), b.ncols()),
        ));
    }
    let n = b.ncols();
    let mut acc = vec![0.0; n];
    let mut marker = vec![usize::MAX; n];
    let mut touched: Vec<usize> = Vec::new();

    let mut offsets = Vec::with_capacity(a.nrows() + 1);
    let mut cols = Vec::with_capacity(a.nnz() + b.nnz());
    let mut vals = Vec::with_capacity(a.nnz() + b.nnz());
    offsets.push(0);
    for i in 0..a.nrows() {
        touched.clear();
        let (ac, av) = a.row(i);
        for (&k, &aik) in ac.iter().zip(av) {
            let (bc, bv) = b.row(k);
            for (&j, &bkj) in bc.iter().zip(bv) {
                if marker[j] != i {
                    marker[j] = i;
                    acc[j] = aik * bkj;
                    touched.push(j);
                } else {
                    acc[j] += aik * bkj;
                }
            }
        }
        touched.sort_unstable();
        for &j in &touched {
            cols.push(j);
            vals.push(acc[j]);
        }
        offsets.push(cols.len());
    }
    Ok(SparseMatrix::from_csr_unchecked(a.nrows(), n, offsets, cols, vals))
}

/// `A * B` restricted to the structure of `pattern`.
///
/// Entries of the true product outside `pattern` are discarded, not lumped.
/// Positions of `pattern` the product never touches stay absent.
pub fn spgemm_fixed_sparsity(
    a: &SparseMatrix,
    b: &SparseMatrix,
    pattern: &SparseMatrix,
) -> Result<SparseMatrix> {
    if a.ncols() != b.nrows() {
        return Err(Error::dims(
            "spgemm_fixed_sparsity",
            format!("{}x{} times {}x{}", a.nrows(), a.ncols(), b.nrows(), b.ncols()),
        ));
    }
    if pattern.nrows() != a.nrows() || pattern.ncols() != b.ncols() {
        return Err(Error::dims(
            "spgemm_fixed_sparsity",
            "pattern shape differs from product shape",
        ));
    }
    let n = b.ncols();
    // slot[j] = position of column j in the current pattern row, valid when stamp[j] == i
    let mut slot = vec![0usize; n];
    let mut stamp = vec![usize::MAX; n];
    let mut row_acc: Vec<f64> = Vec::new();
    let mut row_hit: Vec<bool> = Vec::new();

    let mut offsets = Vec::with_capacity(a.nrows() + 1);
    let mut cols = Vec::with_capacity(pattern.nnz());
    let mut vals = Vec::with_capacity(pattern.nnz());
    offsets.push(0);
    for i in 0..a.nrows() {
        let (pc, _) = pattern.row(i);
        row_acc.clear();
        row_acc.resize(pc.len(), 0.0);
        row_hit.clear();
        row_hit.resize(pc.len(), false);
        for (s, &j) in pc.iter().enumerate() {
            slot[j] = s;
            stamp[j] = i;
        }
        let (ac, av) = a.row(i);
        for (&k, &aik) in ac.iter().zip(av) {
            let (bc, bv) = b.row(k);
            for (&j, &bkj) in bc.iter().zip(bv) {
                if stamp[j] == i {
                    let s = slot[j];
                    row_acc[s] += aik * bkj;
                    row_hit[s] = true;
                }
            }
        }
        for (s, &j) in pc.iter().enumerate() {
            if row_hit[s] {
                cols.push(j);
                vals.push(row_acc[s]);
            }
        }
        offsets.push(cols.len());
    }
    Ok(SparseMatrix::from_csr_unchecked(a.nrows(), n, offsets, cols, vals))
}

/// Submatrix `A[rows, cols]` with contiguous renumbering.
pub fn extract(a: &SparseMatrix, rows: &IndexSet, cols: &IndexSet) -> Result<SparseMatrix> {
    if let Some(&r) = rows.as_slice().last() {
        if r >= a.nrows() {
            return Err(Error::IndexOutOfRange { index: r, dim: a.nrows() });
        }
    }
    if let Some(&c) = cols.as_slice().last() {
        if c >= a.ncols() {
            return Err(Error::IndexOutOfRange { index: c, dim: a.ncols() });
        }
    }
    let map = cols.local_map(a.ncols());
    let mut offsets = Vec::with_capacity(rows.len() + 1);
    let mut out_cols = Vec::new();
    let mut out_vals = Vec::new();
    offsets.push(0);
    for i in rows.iter() {
        let (rc, rv) = a.row(i);
        for (&j, &v) in rc.iter().zip(rv) {
            let lj = map[j];
            if lj != usize::MAX {
                out_cols.push(lj);
                out_vals.push(v);
            }
        }
        offsets.push(out_cols.len());
    }
    Ok(SparseMatrix::from_csr_unchecked(rows.len(), cols.len(), offsets, out_cols, out_vals))
}

/// Drops small off-diagonal entries against a row-relative threshold.
///
/// `a_ij` (j != i) is dropped when `|a_ij| < rel_tol * max_k |a_ik|`. With
/// `lump`, each dropped value is added to the diagonal (inserted if absent),
/// which preserves row sums. Diagonal entries of square matrices are never
/// dropped; rectangular matrices have no protected positions.
pub fn drop_and_lump(a: &SparseMatrix, rel_tol: f64, lump: bool) -> Result<SparseMatrix> {
    if !(rel_tol >= 0.0) {
        return Err(Error::InvalidParameter(format!("drop tolerance {rel_tol} must be >= 0")));
    }
    if lump && !a.is_square() {
        return Err(Error::dims("drop_and_lump", "lumping requires a square matrix"));
    }
    if rel_tol == 0.0 {
        return Ok(a.clone());
    }
    let square = a.is_square();
    let mut offsets = Vec::with_capacity(a.nrows() + 1);
    let mut cols = Vec::with_capacity(a.nnz());
    let mut vals = Vec::with_capacity(a.nnz());
    offsets.push(0);
    for i in 0..a.nrows() {
        let (rc, rv) = a.row(i);
        let row_max = rv.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let threshold = rel_tol * row_max;
        let mut dropped = 0.0;
        let mut diag_pos: Option<usize> = None;
        let row_start = cols.len();
        for (&j, &v) in rc.iter().zip(rv) {
            let is_diag = square && j == i;
            if !is_diag && v.abs() < threshold {
                dropped += v;
                continue;
            }
            if is_diag {
                diag_pos = Some(cols.len());
            }
            cols.push(j);
            vals.push(v);
        }
        if lump && dropped != 0.0 {
            match diag_pos {
                Some(p) => vals[p] += dropped,
                None => {
                    let at = row_start + cols[row_start..].partition_point(|&j| j < i);
                    cols.insert(at, i);
                    vals.insert(at, dropped);
                }
            }
        }
        offsets.push(cols.len());
    }
    Ok(SparseMatrix::from_csr_unchecked(a.nrows(), a.ncols(), offsets, cols, vals))
}
