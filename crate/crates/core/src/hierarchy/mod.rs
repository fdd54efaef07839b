//! Multigrid hierarchy construction.
//!
//! Each level stores only what the F-point-smoothing V-cycle needs: the
//! restrictor, the prolongator, `A_ff`, `A_fc` and the F-point polynomial.
//! The full matrix of an intermediate level is dropped once the next coarse
//! matrix has been formed.

mod config;
mod operators;
mod summary;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use config::{InverseType, ProlongationType, SetupConfig, SmoothType};
pub use operators::{build_prolongation, build_restriction, coarse_matrix, try_truncate, Restriction};
pub use summary::{dump_levels, CoarseSummary, HierarchySummary, LevelSummary};

use crate::error::{Error, Result};
use crate::poly::PolySolver;
use crate::seeds::{derive_seed, Stream};
use crate::sparse::SparseMatrix;
use crate::splitting::{cf_split, CfSplit, DdcPassStats};

#[derive(Debug, Clone)]
pub struct Level {
    pub r: SparseMatrix,
    pub p: SparseMatrix,
    pub a_ff: SparseMatrix,
    pub a_fc: SparseMatrix,
    pub f_smoother: PolySolver,
    /// Assembled smoother, kept only when smoothing is not matrix-free.
    pub aff_inv_assembled: Option<SparseMatrix>,
    pub split: CfSplit,
    pub n: usize,
    pub nnz_a: usize,
    pub ddc_passes: Vec<DdcPassStats>,
}

impl Level {
    /// Stored entries this level contributes to the solve.
    pub fn stored_nnz(&self) -> usize {
        self.a_ff.nnz()
            + self.a_fc.nnz()
            + self.r.nnz()
            + self.p.nnz()
            + self.aff_inv_assembled.as_ref().map_or(0, |m| m.nnz())
    }
}

/// Wall-clock seconds per setup component.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SetupTimings {
    pub cf_split: f64,
    pub prolongator: f64,
    pub polynomial: f64,
    pub spgemm_r: f64,
    pub spgemm_coarse: f64,
    pub extract: f64,
    pub drop: f64,
    pub truncation: f64,
    pub coarse_solver: f64,
    pub total: f64,
}

impl SetupTimings {
    pub fn component_sum(&self) -> f64 {
        self.cf_split
            + self.prolongator
            + self.polynomial
            + self.spgemm_r
            + self.spgemm_coarse
            + self.extract
            + self.drop
            + self.truncation
            + self.coarse_solver
    }
}

#[derive(Debug, Clone)]
pub struct Hierarchy {
    pub levels: Vec<Level>,
    pub coarsest_a: SparseMatrix,
    pub coarse_solver: PolySolver,
    pub top_a: SparseMatrix,
    /// Level at which a tentative coarse solver was accepted.
    pub truncated_at: Option<usize>,
    pub cycle_complexity: f64,
    pub storage_complexity: f64,
    pub grid_complexity: f64,
    pub timings: SetupTimings,
    pub config: SetupConfig,
}

impl Hierarchy {
    /// Levels including the coarsest.
    pub fn num_levels(&self) -> usize {
        self.levels.len() + 1
    }

    /// Unknowns per level, coarsest last.
    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.n).chain([self.coarsest_a.nrows()]).collect()
    }

    pub fn summary(&self) -> HierarchySummary {
        HierarchySummary::from_hierarchy(self)
    }
}

/// Builds the hierarchy for `a`.
pub fn setup(a: &SparseMatrix, cfg: &SetupConfig) -> Result<Hierarchy> {
    cfg.validate()?;
    if !a.is_square() {
        return Err(Error::dims("setup", "matrix is not square"));
    }
    if a.nrows() == 0 {
        return Err(Error::InvalidMatrix("empty matrix".into()));
    }
    let start = Instant::now();
    let mut timings = SetupTimings::default();
    let mut levels: Vec<Level> = Vec::new();
    let mut current = a.clone();
    let mut truncated_at = None;

    let coarse_solver = loop {
        let level = levels.len();
        let n = current.nrows();

        if n <= cfg.min_coarse_size {
            break build_coarse_solver(&current, cfg, level, &mut timings)?;
        }
        if level + 1 >= cfg.max_levels {
            log::warn!("reached max_levels = {} with {n} unknowns left", cfg.max_levels);
            break build_coarse_solver(&current, cfg, level, &mut timings)?;
        }
        if let Some(tol) = cfg.auto_truncate_tol {
            if level >= cfg.auto_truncate_start_level {
                let t = Instant::now();
                let tentative = try_truncate(&current, cfg, level, tol);
                timings.truncation += t.elapsed().as_secs_f64();
                if let Some(p) = tentative {
                    truncated_at = Some(level);
                    break p;
                }
            }
        }

        let t = Instant::now();
        let seed = derive_seed(cfg.seed, level, Stream::CfSplit);
        let outcome = cf_split(
            &current,
            cfg.strong_threshold,
            cfg.ddc_fraction,
            cfg.ddc_its,
            seed,
            cfg.max_luby_loops,
        )?;
        timings.cf_split += t.elapsed().as_secs_f64();
        let split = outcome.split;
        if split.n_f() == 0 {
            return Err(Error::CoarseningStagnated { level, n });
        }
        if split.n_c() == 0 {
            // every unknown is F: the F block is the whole matrix, solve it directly
            log::debug!("level {level}: splitting left no C points, stopping here");
            break build_coarse_solver(&current, cfg, level, &mut timings)?;
        }

        let res = build_restriction(&current, &split, cfg, level, &mut timings)?;
        let t = Instant::now();
        let p = build_prolongation(&current, &split)?;
        timings.prolongator += t.elapsed().as_secs_f64();
        let next = coarse_matrix(&current, &res.r, &p, cfg, &mut timings)?;

        log::debug!(
            "level {level}: n = {n}, n_f = {}, n_c = {}, nnz = {}, coarse nnz = {}",
            split.n_f(),
            split.n_c(),
            current.nnz(),
            next.nnz()
        );
        levels.push(Level {
            r: res.r,
            p,
            a_ff: res.a_ff,
            a_fc: res.a_fc,
            f_smoother: res.f_smoother,
            aff_inv_assembled: (!cfg.matrix_free_polys).then_some(res.aff_inv),
            split,
            n,
            nnz_a: current.nnz(),
            ddc_passes: outcome.ddc_passes,
        });
        current = next;
    };

    timings.total = start.elapsed().as_secs_f64();
    let mut h = Hierarchy {
        levels,
        coarsest_a: current,
        coarse_solver,
        top_a: a.clone(),
        truncated_at,
        cycle_complexity: 0.0,
        storage_complexity: 0.0,
        grid_complexity: 0.0,
        timings,
        config: cfg.clone(),
    };
    let s = h.summary();
    h.storage_complexity = s.recompute_storage_complexity();
    h.grid_complexity = s.recompute_grid_complexity();
    h.cycle_complexity = crate::solve::cycle_complexity(&h, &crate::solve::SolveConfig::default());
    Ok(h)
}

/// A priori level from which to test tentative coarse solvers on a
/// `dim`-dimensional transport problem with `n` unknowns.
///
/// Assumes each level at most halves the unknowns and that a degree-`m`
/// polynomial resolves about `0.3 (m + 1)` cells along a flow line, so
/// testing starts once `n_k <= (0.3 (m + 1))^dim`.
pub fn estimate_truncate_start_level(n: usize, dim: u32, coarsest_poly_order: usize) -> usize {
    let target = (0.3 * (coarsest_poly_order + 1) as f64).powi(dim.max(1) as i32);
    let mut level = 0;
    let mut size = n;
    while size as f64 > target {
        size = size.div_ceil(2);
        level += 1;
    }
    level
}

fn build_coarse_solver(
    a: &SparseMatrix,
    cfg: &SetupConfig,
    level: usize,
    timings: &mut SetupTimings,
) -> Result<PolySolver> {
    let t = Instant::now();
    let seed = derive_seed(cfg.seed, level, Stream::CoarsePoly);
    let p = cfg.coarsest_inverse_type.build(a, cfg.coarsest_poly_order, seed);
    timings.coarse_solver += t.elapsed().as_secs_f64();
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{build_advection_1d, AdvectionProblem};

    #[test]
    fn start_level_estimate() {
        assert_eq!(estimate_truncate_start_level(500, 2, 100), 0);
        assert_eq!(estimate_truncate_start_level(128 * 128, 2, 100), 5);
        assert_eq!(estimate_truncate_start_level(256 * 256, 2, 100), 7);
        assert_eq!(estimate_truncate_start_level(512 * 512, 2, 100), 9);
        // a line of 256 cells is out of reach of one degree-100 polynomial
        assert_eq!(estimate_truncate_start_level(256, 1, 100), 4);
    }

    #[test]
    fn diagonal_matrix_is_single_level() {
        let a = SparseMatrix::from_diagonal(&(1..=40).map(|i| i as f64).collect::<Vec<_>>());
        let h = setup(&a, &SetupConfig { auto_truncate_tol: None, ..Default::default() }).unwrap();
        assert_eq!(h.num_levels(), 1);
        assert_eq!(h.coarsest_a.nrows(), 40);
        assert!(h.storage_complexity >= 1.0 && h.cycle_complexity >= 1.0);
    }

    #[test]
    fn one_d_levels_have_diagonal_f_blocks() {
        let a = build_advection_1d(1024, 1.0).unwrap();
        let cfg = SetupConfig { strong_threshold: 0.5, poly_order: 1, auto_truncate_tol: None, ..Default::default() };
        let h = setup(&a, &cfg).unwrap();
        assert!(h.levels.len() > 3);
        for l in &h.levels {
            let (rc, _) = (l.a_ff.col_indices(), ());
            assert_eq!(rc.len(), l.a_ff.nrows(), "A_ff not diagonal");
        }
        let sizes = h.level_sizes();
        assert!(sizes.windows(2).all(|w| w[1] < w[0]));
        for (l, next) in h.levels.iter().zip(sizes.iter().skip(1)) {
            assert_eq!(l.split.n_c(), *next);
            assert_eq!(l.r.nrows(), *next);
            assert_eq!(l.p.ncols(), *next);
        }
    }

    #[test]
    fn setup_is_deterministic() {
        let (a, _) = AdvectionProblem::from_angle(24, 24, std::f64::consts::FRAC_PI_4).build().unwrap();
        let cfg = SetupConfig::default();
        let h1 = setup(&a, &cfg).unwrap();
        let h2 = setup(&a, &cfg).unwrap();
        assert_eq!(h1.summary(), h2.summary());
    }

    #[test]
    fn storage_complexity_recomputes_exactly() {
        let (a, _) = AdvectionProblem::from_angle(20, 20, std::f64::consts::FRAC_PI_4).build().unwrap();
        let h = setup(&a, &SetupConfig { auto_truncate_tol: None, ..Default::default() }).unwrap();
        let s = h.summary();
        let back: HierarchySummary = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back.recompute_storage_complexity(), h.storage_complexity);
        assert!(h.storage_complexity > 1.0);
    }

    #[test]
    fn rejects_unsupported_and_non_square() {
        let a = SparseMatrix::identity(4);
        let cfg = SetupConfig { smooth_type: SmoothType::Fc, ..Default::default() };
        assert!(matches!(setup(&a, &cfg), Err(Error::Unsupported(_))));
        let r = SparseMatrix::zeros(2, 3);
        assert!(setup(&r, &SetupConfig::default()).is_err());
    }

    #[test]
    fn max_levels_caps_hierarchy() {
        let a = build_advection_1d(512, 1.0).unwrap();
        let cfg = SetupConfig {
            strong_threshold: 0.5,
            max_levels: 3,
            auto_truncate_tol: None,
            coarsest_poly_order: 10,
            ..Default::default()
        };
        let h = setup(&a, &cfg).unwrap();
        assert_eq!(h.num_levels(), 3);
    }

    #[test]
    fn timings_cover_total() {
        let (a, _) = AdvectionProblem::from_angle(48, 48, std::f64::consts::FRAC_PI_4).build().unwrap();
        let h = setup(&a, &SetupConfig::default()).unwrap();
        let t = &h.timings;
        assert!(t.component_sum() <= t.total * 1.0001);
        assert!(t.component_sum() >= 0.95 * t.total, "{t:?}");
    }
}
