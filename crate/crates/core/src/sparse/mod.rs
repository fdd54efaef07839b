//! Compressed sparse row storage and the kernels the multigrid is built from.
//!
//! Every matrix is kept in canonical form: strictly increasing column indices
//! within a row, no duplicates, finite values. Explicit zeros are allowed and
//! are only removed by [`drop_and_lump`].

mod index_set;
mod kernels;
pub mod mtx;

pub use index_set::IndexSet;
pub use kernels::{drop_and_lump, extract, spgemm, spgemm_fixed_sparsity};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from raw CSR arrays, validating canonical form.
    pub fn from_csr(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let m = SparseMatrix { nrows, ncols, row_offsets, col_indices, values };
        m.validate()?;
        Ok(m)
    }

    /// Trusted constructor for kernels that produce canonical output by construction.
    pub(crate) fn from_csr_unchecked(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        let m = SparseMatrix { nrows, ncols, row_offsets, col_indices, values };
        debug_assert!(m.validate().is_ok(), "{:?}", m.validate());
        m
    }

    /// Builds a matrix from (row, col, value) triplets. Duplicates are summed
    /// in input order.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut counts = vec![0usize; nrows + 1];
        for &(i, j, v) in triplets {
            if i >= nrows {
                return Err(Error::IndexOutOfRange { index: i, dim: nrows });
            }
            if j >= ncols {
                return Err(Error::IndexOutOfRange { index: j, dim: ncols });
            }
            if !v.is_finite() {
                return Err(Error::InvalidMatrix(format!("non-finite value at ({i}, {j})")));
            }
            counts[i + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(i, j, v) in triplets {
            cols[next[i]] = j;
            vals[next[i]] = v;
            next[i] += 1;
        }

        let mut row_offsets = Vec::with_capacity(nrows + 1);
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_offsets.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for i in 0..nrows {
            scratch.clear();
            scratch.extend((counts[i]..counts[i + 1]).map(|k| (cols[k], vals[k])));
            // stable sort keeps duplicate summation in input order
            scratch.sort_by_key(|&(j, _)| j);
            for &(j, v) in &scratch {
                if col_indices.len() > row_offsets[i] && *col_indices.last().unwrap() == j {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Ok(Self::from_csr_unchecked(nrows, ncols, row_offsets, col_indices, values))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_csr_unchecked(n, n, (0..=n).collect(), (0..n).collect(), diag.to_vec())
    }

    /// An `nrows x ncols` matrix with no stored entries.
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self::from_csr_unchecked(nrows, ncols, vec![0; nrows + 1], Vec::new(), Vec::new())
    }

    /// Converts a dense row-major matrix, storing only nonzero entries.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut trip = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::dims("from_dense", "ragged rows"));
            }
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    trip.push((i, j, v));
                }
            }
        }
        Self::from_triplets(nrows, ncols, &trip)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, row) in out.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                row[j] = v;
            }
        }
        out
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.row_offsets[i], self.row_offsets[i + 1]);
        (&self.col_indices[s..e], &self.values[s..e])
    }

    /// Stored value at `(i, j)`, or 0 when structurally absent.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |k| vals[k])
    }

    /// Checks the canonical-form invariants.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidMatrix(m));
        if self.row_offsets.len() != self.nrows + 1 {
            return bad(format!(
                "row_offsets has length {}, expected {}",
                self.row_offsets.len(),
                self.nrows + 1
            ));
        }
        if self.row_offsets[0] != 0 {
            return bad("row_offsets[0] != 0".into());
        }
        if self.col_indices.len() != self.values.len()
            || self.row_offsets[self.nrows] != self.col_indices.len()
        {
            return bad("row_offsets[nrows], col_indices and values lengths disagree".into());
        }
        for i in 0..self.nrows {
            let (s, e) = (self.row_offsets[i], self.row_offsets[i + 1]);
            if s > e {
                return bad(format!("row_offsets decreasing at row {i}"));
            }
            let cols = &self.col_indices[s..e];
            for w in cols.windows(2) {
                if w[0] >= w[1] {
                    return bad(format!("row {i}: column indices not strictly increasing"));
                }
            }
            if let Some(&last) = cols.last() {
                if last >= self.ncols {
                    return Err(Error::IndexOutOfRange { index: last, dim: self.ncols });
                }
            }
        }
        if let Some(k) = self.values.iter().position(|v| !v.is_finite()) {
            return bad(format!("non-finite value at storage position {k}"));
        }
        Ok(())
    }

    /// `y = A x`.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols {
            return Err(Error::dims(
                "spmv",
                format!("matrix has {} columns, vector has length {}", self.ncols, x.len()),
            ));
        }
        let mut y = vec![0.0; self.nrows];
        self.spmv_into(x, &mut y);
        Ok(y)
    }

    /// Unchecked-shape SpMV into a caller-owned buffer.
    #[inline]
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let (s, e) = (self.row_offsets[i], self.row_offsets[i + 1]);
            let mut acc = 0.0;
            for k in s..e {
                acc += self.values[k] * x[self.col_indices[k]];
            }
            *yi = acc;
        }
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.col_indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; self.nnz()];
        let mut vals = vec![0.0; self.nnz()];
        // row-major traversal keeps each output row sorted
        for i in 0..self.nrows {
            let (rc, rv) = self.row(i);
            for (&j, &v) in rc.iter().zip(rv) {
                cols[next[j]] = i;
                vals[next[j]] = v;
                next[j] += 1;
            }
        }
        SparseMatrix::from_csr_unchecked(self.ncols, self.nrows, counts, cols, vals)
    }

    /// Main diagonal; structurally missing entries read as 0.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    /// Same structure with every value multiplied by `s`.
    pub fn scaled(&self, s: f64) -> SparseMatrix {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `diag(d) * A`.
    pub fn scale_rows(&self, d: &[f64]) -> Result<SparseMatrix> {
        if d.len() != self.nrows {
            return Err(Error::dims("scale_rows", "scaling vector length != nrows"));
        }
        let mut out = self.clone();
        for (i, &di) in d.iter().enumerate() {
            let (s, e) = (out.row_offsets[i], out.row_offsets[i + 1]);
            out.values[s..e].iter_mut().for_each(|v| *v *= di);
        }
        Ok(out)
    }

    /// `A * diag(d)`.
    pub fn scale_cols(&self, d: &[f64]) -> Result<SparseMatrix> {
        if d.len() != self.ncols {
            return Err(Error::dims("scale_cols", "scaling vector length != ncols"));
        }
        let mut out = self.clone();
        for (v, &j) in out.values.iter_mut().zip(&self.col_indices) {
            *v *= d[j];
        }
        Ok(out)
    }

    /// The structure of `A` with the full diagonal added (square matrices only),
    /// values set to one.
    pub fn pattern_with_diagonal(&self) -> Result<SparseMatrix> {
        if !self.is_square() {
            return Err(Error::dims("pattern_with_diagonal", "matrix is not square"));
        }
        let n = self.nrows;
        let mut offsets = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(self.nnz() + n);
        offsets.push(0);
        for i in 0..n {
            let (rc, _) = self.row(i);
            let mut placed = false;
            for &j in rc {
                if !placed && j >= i {
                    if j != i {
                        cols.push(i);
                    }
                    placed = true;
                }
                cols.push(j);
            }
            if !placed {
                cols.push(i);
            }
            offsets.push(cols.len());
        }
        let vals = vec![1.0; cols.len()];
        Ok(SparseMatrix::from_csr_unchecked(n, n, offsets, cols, vals))
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_frobenius(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Entry-wise `self + s * other`; structure is the union.
    pub fn add_scaled(&self, other: &SparseMatrix, s: f64) -> Result<SparseMatrix> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::dims("add_scaled", "shapes differ"));
        }
        let mut offsets = Vec::with_capacity(self.nrows + 1);
        let mut cols = Vec::with_capacity(self.nnz() + other.nnz());
        let mut vals = Vec::with_capacity(self.nnz() + other.nnz());
        offsets.push(0);
        for i in 0..self.nrows {
            let (ac, av) = self.row(i);
            let (bc, bv) = other.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ac.len() || q < bc.len() {
                if q == bc.len() || (p < ac.len() && ac[p] < bc[q]) {
                    cols.push(ac[p]);
                    vals.push(av[p]);
                    p += 1;
                } else if p == ac.len() || bc[q] < ac[p] {
                    cols.push(bc[q]);
                    vals.push(s * bv[q]);
                    q += 1;
                } else {
                    cols.push(ac[p]);
                    vals.push(av[p] + s * bv[q]);
                    p += 1;
                    q += 1;
                }
            }
            offsets.push(cols.len());
        }
        Ok(SparseMatrix::from_csr_unchecked(self.nrows, self.ncols, offsets, cols, vals))
    }
}

/// Euclidean norm.
#[inline]
pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[inline]
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}
