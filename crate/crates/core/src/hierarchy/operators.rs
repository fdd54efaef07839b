use std::time::Instant;

use super::{SetupConfig, SetupTimings};
use crate::error::{Error, Result};
use crate::poly::{assemble_fixed_sparsity, PolySolver};
use crate::seeds::{derive_seed, Stream};
use crate::sparse::{drop_and_lump, extract, spgemm, SparseMatrix};
use crate::splitting::CfSplit;

/// Blocks and operators produced for one level's restriction.
#[derive(Debug, Clone)]
pub struct Restriction {
    /// `n_C x n`, `[Z I]` scattered back to the level's own ordering.
    pub r: SparseMatrix,
    pub a_ff: SparseMatrix,
    pub a_fc: SparseMatrix,
    /// Matrix-free approximation of `A_ff^{-1}`, also the F-point smoother.
    pub f_smoother: PolySolver,
    /// Fixed-sparsity assembly of `f_smoother`.
    pub aff_inv: SparseMatrix,
}

/// Builds `R = [Z I]` with `Z = -A_cf Ahat_ff^{-1}`.
pub fn build_restriction(
    a: &SparseMatrix,
    split: &CfSplit,
    cfg: &SetupConfig,
    level: usize,
    timings: &mut SetupTimings,
) -> Result<Restriction> {
    if !a.is_square() || a.nrows() != split.n() {
        return Err(Error::dims("build_restriction", "matrix and splitting sizes disagree"));
    }
    let (f, c) = (split.f_set(), split.c_set());

    let t = Instant::now();
    let a_ff = extract(a, f, f)?;
    let a_fc = extract(a, f, c)?;
    let a_cf = extract(a, c, f)?;
    timings.extract += t.elapsed().as_secs_f64();

    let t = Instant::now();
    let seed = derive_seed(cfg.seed, level, Stream::SmootherPoly);
    let f_smoother = cfg.inverse_type.build(&a_ff, cfg.poly_order, seed)?;
    let aff_inv = assemble_fixed_sparsity(&f_smoother, &a_ff)?;
    timings.polynomial += t.elapsed().as_secs_f64();

    let t = Instant::now();
    let z = spgemm(&a_cf, &aff_inv)?.scaled(-1.0);
    timings.spgemm_r += t.elapsed().as_secs_f64();

    let t = Instant::now();
    let z = drop_and_lump(&z, cfg.r_drop, false)?;
    timings.drop += t.elapsed().as_secs_f64();

    let r = assemble_r(&z, split)?;
    Ok(Restriction { r, a_ff, a_fc, f_smoother, aff_inv })
}

/// Scatters `[Z I]` into the level's own column ordering.
fn assemble_r(z: &SparseMatrix, split: &CfSplit) -> Result<SparseMatrix> {
    let (f, c) = (split.f_set().as_slice(), split.c_set().as_slice());
    let n_c = c.len();
    let mut offsets = Vec::with_capacity(n_c + 1);
    let mut cols = Vec::with_capacity(z.nnz() + n_c);
    let mut vals = Vec::with_capacity(z.nnz() + n_c);
    offsets.push(0);
    for (k, &ck) in c.iter().enumerate() {
        let (zc, zv) = z.row(k);
        let mut placed = false;
        for (&jl, &v) in zc.iter().zip(zv) {
            let j = f[jl];
            if !placed && ck < j {
                cols.push(ck);
                vals.push(1.0);
                placed = true;
            }
            cols.push(j);
            vals.push(v);
        }
        if !placed {
            cols.push(ck);
            vals.push(1.0);
        }
        offsets.push(cols.len());
    }
    SparseMatrix::from_csr(n_c, split.n(), offsets, cols, vals)
}

/// One-point prolongator `P = [W; I]` in the level's own row ordering.
///
/// Each F row gets a single 1 in the column of its largest-magnitude C
/// coupling, lowest C index on ties. An F row with no off-diagonal entries at
/// all gets an empty row; one with off-diagonals but no C coupling is an error.
pub fn build_prolongation(a: &SparseMatrix, split: &CfSplit) -> Result<SparseMatrix> {
    if !a.is_square() || a.nrows() != split.n() {
        return Err(Error::dims("build_prolongation", "matrix and splitting sizes disagree"));
    }
    let n = split.n();
    let cmap = split.c_set().local_map(n);
    let mut offsets = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(n);
    offsets.push(0);
    for i in 0..n {
        if !split.is_f(i) {
            cols.push(cmap[i]);
        } else {
            let (rc, rv) = a.row(i);
            let mut best: Option<(usize, f64)> = None;
            let mut has_offdiag = false;
            for (&j, &v) in rc.iter().zip(rv) {
                if j == i || v == 0.0 {
                    continue;
                }
                has_offdiag = true;
                if split.is_f(j) {
                    continue;
                }
                // columns are ascending, so strict > keeps the lowest index
                if best.is_none_or(|(_, m)| v.abs() > m) {
                    best = Some((cmap[j], v.abs()));
                }
            }
            match best {
                Some((k, _)) => cols.push(k),
                None if has_offdiag => return Err(Error::NoCoarseCoupling { row: i }),
                None => {}
            }
        }
        offsets.push(cols.len());
    }
    let vals = vec![1.0; cols.len()];
    SparseMatrix::from_csr(n, split.n_c(), offsets, cols, vals)
}

/// `R (A P)` followed by relative dropping with `a_drop`, lumped if `a_lump`.
pub fn coarse_matrix(
    a: &SparseMatrix,
    r: &SparseMatrix,
    p: &SparseMatrix,
    cfg: &SetupConfig,
    timings: &mut SetupTimings,
) -> Result<SparseMatrix> {
    let t = Instant::now();
    let ap = spgemm(a, p)?;
    let rap = spgemm(r, &ap)?;
    timings.spgemm_coarse += t.elapsed().as_secs_f64();
    let t = Instant::now();
    let out = drop_and_lump(&rap, cfg.a_drop, cfg.a_lump)?;
    timings.drop += t.elapsed().as_secs_f64();
    Ok(out)
}

/// Builds a tentative coarse solver on `a` and keeps it only if one
/// application reduces the residual of an independent random right-hand side
/// to `tol`.
pub fn try_truncate(a: &SparseMatrix, cfg: &SetupConfig, level: usize, tol: f64) -> Option<PolySolver> {
    let s1 = derive_seed(cfg.seed, level, Stream::CoarsePoly);
    let s2 = derive_seed(cfg.seed, level, Stream::TruncationRhs);
    let poly = match cfg.coarsest_inverse_type.build(a, cfg.coarsest_poly_order, s1) {
        Ok(p) => p,
        Err(e) => {
            log::warn!("level {level}: tentative coarse solver failed ({e}); continuing to coarsen");
            return None;
        }
    };
    let b = crate::seeds::random_unit_vector(a.nrows(), s2);
    match poly.relative_residual(a, &b) {
        Ok(res) if res <= tol => {
            log::debug!("level {level}: truncating, tentative residual {res:e}");
            Some(poly)
        }
        Ok(res) => {
            log::debug!("level {level}: tentative residual {res:e} above {tol:e}");
            None
        }
        Err(e) => {
            log::warn!("level {level}: tentative coarse solver unusable ({e})");
            None
        }
    }
}
