//! V-cycle with F-point up-smoothing inside an undamped Richardson iteration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hierarchy::{Hierarchy, Level};
use crate::poly::PolyWork;
use crate::sparse::norm2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_iters: usize,
    /// F-point smoothing sweeps per level per cycle.
    pub f_smooth_its: usize,
    /// Start F-point smoothing from `W e_c` instead of zero.
    pub w_injection: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig { rtol: 1e-10, atol: 1e-50, max_iters: 100, f_smooth_its: 1, w_injection: false }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0) {
            return Err(Error::InvalidParameter(format!("rtol must be > 0, got {}", self.rtol)));
        }
        if !(self.atol >= 0.0) {
            return Err(Error::InvalidParameter(format!("atol must be >= 0, got {}", self.atol)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    /// `||b - A x||` before the first cycle and after each one.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub cycle_complexity: f64,
    pub storage_complexity: f64,
    pub flops_per_cycle: u64,
}

/// Residual growth beyond this factor of the initial residual aborts the solve.
const DIVERGENCE_FACTOR: f64 = 1e8;

/// Error estimate `e` with `A_level e ~= r`.
pub fn vcycle(h: &Hierarchy, level: usize, r: &[f64], cfg: &SolveConfig) -> Result<Vec<f64>> {
    let n = if level < h.levels.len() { h.levels[level].n } else { h.coarsest_a.nrows() };
    if level > h.levels.len() || r.len() != n {
        return Err(Error::dims("vcycle", format!("level {level} expects length {n}, got {}", r.len())));
    }
    let mut work = PolyWork::default();
    Ok(cycle(h, level, r, cfg, &mut work))
}

fn cycle(h: &Hierarchy, level: usize, r: &[f64], cfg: &SolveConfig, work: &mut PolyWork) -> Vec<f64> {
    let Some(l) = h.levels.get(level) else {
        let mut e = vec![0.0; r.len()];
        h.coarse_solver.apply_into(&h.coarsest_a, r, &mut e, work);
        return e;
    };
    let mut r_c = vec![0.0; l.r.nrows()];
    l.r.spmv_into(r, &mut r_c);
    let e_c = cycle(h, level + 1, &r_c, cfg, work);

    let f = l.split.f_set().as_slice();
    let n_f = f.len();
    // t = r_f - A_fc e_c, kept across sweeps
    let mut t = vec![0.0; n_f];
    l.a_fc.spmv_into(&e_c, &mut t);
    for (t, &i) in t.iter_mut().zip(f) {
        *t = r[i] - *t;
    }

    let mut e_f = vec![0.0; n_f];
    let mut started = false;
    if cfg.w_injection {
        let cols = l.p.col_indices();
        let offs = l.p.row_offsets();
        for (ef, &i) in e_f.iter_mut().zip(f) {
            if offs[i + 1] > offs[i] {
                *ef = e_c[cols[offs[i]]];
                started = true;
            }
        }
    }
    let mut resid = vec![0.0; n_f];
    let mut delta = vec![0.0; n_f];
    for _ in 0..cfg.f_smooth_its {
        if started {
            l.a_ff.spmv_into(&e_f, &mut resid);
            resid.iter_mut().zip(&t).for_each(|(r, t)| *r = t - *r);
        } else {
            resid.copy_from_slice(&t);
        }
        smooth(l, &resid, &mut delta, work);
        if started {
            e_f.iter_mut().zip(&delta).for_each(|(e, d)| *e += d);
        } else {
            e_f.copy_from_slice(&delta);
            started = true;
        }
    }

    let mut e = vec![0.0; l.n];
    for (&i, v) in f.iter().zip(&e_f) {
        e[i] = *v;
    }
    for (&i, v) in l.split.c_set().as_slice().iter().zip(&e_c) {
        e[i] = *v;
    }
    e
}

fn smooth(l: &Level, r: &[f64], out: &mut [f64], work: &mut PolyWork) {
    match &l.aff_inv_assembled {
        Some(m) => m.spmv_into(r, out),
        None => l.f_smoother.apply_into(&l.a_ff, r, out, work),
    }
}

/// Undamped Richardson: `x <- x + vcycle(b - A x)`.
pub fn richardson_solve(
    h: &Hierarchy,
    b: &[f64],
    x0: &[f64],
    cfg: &SolveConfig,
) -> Result<(Vec<f64>, SolveStats)> {
    cfg.validate()?;
    let a = &h.top_a;
    let n = a.nrows();
    if b.len() != n || x0.len() != n {
        return Err(Error::dims("richardson_solve", format!("matrix has {n} rows, b {} and x0 {}", b.len(), x0.len())));
    }
    let mut x = x0.to_vec();
    let mut ax = vec![0.0; n];
    let mut r = vec![0.0; n];
    let residual = |x: &[f64], ax: &mut [f64], r: &mut [f64]| {
        a.spmv_into(x, ax);
        r.iter_mut().zip(b.iter().zip(ax.iter())).for_each(|(r, (b, ax))| *r = b - ax);
        norm2(r)
    };

    let r0 = residual(&x, &mut ax, &mut r);
    let bnorm = norm2(b);
    let reference = if bnorm > 0.0 { bnorm } else { r0 };
    let threshold = (cfg.rtol * reference).max(cfg.atol);
    let mut history = vec![r0];
    let mut converged = r0 <= threshold;
    let mut work = PolyWork::default();
    while !converged && history.len() <= cfg.max_iters {
        let e = cycle(h, 0, &r, cfg, &mut work);
        x.iter_mut().zip(&e).for_each(|(x, e)| *x += e);
        let rn = residual(&x, &mut ax, &mut r);
        history.push(rn);
        let it = history.len() - 1;
        if !rn.is_finite() || rn > DIVERGENCE_FACTOR * r0 {
            return Err(Error::Diverged { iteration: it, residual: rn });
        }
        converged = rn <= threshold;
    }
    let stats = SolveStats {
        iterations: history.len() - 1,
        residual_history: history,
        converged,
        cycle_complexity: cycle_complexity(h, cfg),
        storage_complexity: h.storage_complexity,
        flops_per_cycle: count_cycle_flops(h, cfg),
    };
    Ok((x, stats))
}

/// Floating-point operations of one V-cycle: 2 per stored entry per SpMV, 2
/// per entry per vector update, copies free.
pub fn count_cycle_flops(h: &Hierarchy, cfg: &SolveConfig) -> u64 {
    let mut total = 0u64;
    for l in &h.levels {
        let n_f = l.split.n_f() as u64;
        let nnz_ff = l.a_ff.nnz() as u64;
        // restriction
        total += 2 * l.r.nnz() as u64;
        // t = r_f - A_fc e_c
        total += 2 * l.a_fc.nnz() as u64 + 2 * n_f;
        let smoother = match &l.aff_inv_assembled {
            Some(m) => 2 * m.nnz() as u64,
            None => l.f_smoother.apply_flops(l.a_ff.nnz(), l.split.n_f()),
        };
        let mut started = false;
        if cfg.w_injection {
            // W e_c, one entry per F row with a C coupling
            let w_nnz = l.split.f_set().iter().filter(|&i| l.p.row(i).0.len() == 1).count() as u64;
            total += 2 * w_nnz;
            started = w_nnz > 0;
        }
        for _ in 0..cfg.f_smooth_its {
            if started {
                // residual update, smoother, correction
                total += 2 * nnz_ff + 2 * n_f + smoother + 2 * n_f;
            } else {
                total += smoother;
                started = true;
            }
        }
    }
    total + h.coarse_solver.apply_flops(h.coarsest_a.nnz(), h.coarsest_a.nrows())
}

/// V-cycle FLOPs over the FLOPs of one top-level SpMV.
pub fn cycle_complexity(h: &Hierarchy, cfg: &SolveConfig) -> f64 {
    count_cycle_flops(h, cfg) as f64 / (2.0 * h.top_a.nnz() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::{setup, InverseType, SetupConfig};
    use crate::problem::build_advection_1d;
    use crate::sparse::SparseMatrix;

    #[test]
    fn identity_single_level_returns_rhs() {
        let a = SparseMatrix::identity(8);
        let h = setup(&a, &SetupConfig::default()).unwrap();
        let r: Vec<f64> = (0..8).map(|i| i as f64 - 3.0).collect();
        let e = vcycle(&h, 0, &r, &SolveConfig::default()).unwrap();
        for (e, r) in e.iter().zip(&r) {
            assert!((e - r).abs() < 1e-15);
        }
        let (x, s) = richardson_solve(&h, &r, &[1.0; 8], &SolveConfig::default()).unwrap();
        assert_eq!(s.iterations, 1);
        assert!(s.converged);
        assert_eq!(s.residual_history.len(), 2);
        for (x, r) in x.iter().zip(&r) {
            assert!((x - r).abs() < 1e-14);
        }
    }

    #[test]
    fn one_d_exact_solver_converges_in_two() {
        let a = build_advection_1d(1024, 1.0).unwrap();
        let cfg = SetupConfig { strong_threshold: 0.5, poly_order: 1, auto_truncate_tol: None, ..Default::default() };
        let h = setup(&a, &cfg).unwrap();
        let b = vec![0.0; 1024];
        let (x, s) = richardson_solve(&h, &b, &vec![1.0; 1024], &SolveConfig::default()).unwrap();
        assert!(s.converged, "{:?}", s.residual_history);
        assert!(s.iterations <= 2);
        assert!(x.iter().all(|v| v.abs() < 1e-8));
    }

    #[test]
    fn flops_hand_count_single_level() {
        // single level, order-0 coefficient coarse solver on an n x n diagonal:
        // one scale of length n, 2n flops, over 2 nnz = 2n
        let n = 10;
        let a = SparseMatrix::from_diagonal(&vec![2.0; n]);
        let cfg = SetupConfig {
            coarsest_poly_order: 0,
            coarsest_inverse_type: InverseType::Arnoldi,
            auto_truncate_tol: None,
            ..Default::default()
        };
        let h = setup(&a, &cfg).unwrap();
        assert_eq!(count_cycle_flops(&h, &SolveConfig::default()), 2 * n as u64);
        assert_eq!(h.cycle_complexity, 1.0);
    }

    #[test]
    fn more_smoothing_costs_more() {
        let a = build_advection_1d(200, 1.0).unwrap();
        let h = setup(&a, &SetupConfig { strong_threshold: 0.5, auto_truncate_tol: None, ..Default::default() }).unwrap();
        let one = count_cycle_flops(&h, &SolveConfig { f_smooth_its: 1, ..Default::default() });
        let two = count_cycle_flops(&h, &SolveConfig { f_smooth_its: 2, ..Default::default() });
        assert!(two > one);
    }

    #[test]
    fn threshold_is_inclusive() {
        // A = 2I, x0 = 0, b = 1: after one cycle the residual is exactly 0
        let a = SparseMatrix::identity(4).scaled(2.0);
        let h = setup(&a, &SetupConfig::default()).unwrap();
        let cfg = SolveConfig { rtol: 1.0, ..Default::default() };
        // initial residual equals ||b|| = reference, so it already counts as converged
        let (_, s) = richardson_solve(&h, &[1.0; 4], &[0.0; 4], &cfg).unwrap();
        assert!(s.converged);
        assert_eq!(s.iterations, 0);
    }

    #[test]
    fn shape_errors() {
        let h = setup(&SparseMatrix::identity(3), &SetupConfig::default()).unwrap();
        assert!(richardson_solve(&h, &[1.0; 2], &[0.0; 3], &SolveConfig::default()).is_err());
        assert!(vcycle(&h, 0, &[1.0; 4], &SolveConfig::default()).is_err());
        assert!(SolveConfig { max_iters: 0, ..Default::default() }.validate().is_err());
    }
}
