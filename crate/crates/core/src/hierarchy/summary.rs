use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Hierarchy;
use crate::error::Result;
use crate::poly::PolyKind;
use crate::sparse::mtx;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub level: usize,
    pub n: usize,
    pub nnz_a: usize,
    pub n_f: usize,
    pub n_c: usize,
    pub nnz_a_ff: usize,
    pub nnz_a_fc: usize,
    pub nnz_r: usize,
    pub nnz_p: usize,
    /// Assembled smoother entries, 0 when smoothing is matrix-free.
    pub nnz_aff_inv: usize,
    pub smoother_order: usize,
    pub smoother_effective_order: usize,
    pub ddc_converted: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoarseSummary {
    pub level: usize,
    pub n: usize,
    pub nnz: usize,
    pub kind: PolyKind,
    pub order: usize,
    pub effective_order: usize,
    /// Roots applied, including added copies (Newton form only).
    pub num_roots: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchySummary {
    pub num_levels: usize,
    pub nnz_top: usize,
    pub n_top: usize,
    pub truncated_at: Option<usize>,
    pub levels: Vec<LevelSummary>,
    pub coarse: CoarseSummary,
    pub storage_complexity: f64,
    pub grid_complexity: f64,
    pub cycle_complexity: f64,
}

impl HierarchySummary {
    pub fn from_hierarchy(h: &Hierarchy) -> Self {
        let levels = h
            .levels
            .iter()
            .enumerate()
            .map(|(i, l)| LevelSummary {
                level: i,
                n: l.n,
                nnz_a: l.nnz_a,
                n_f: l.split.n_f(),
                n_c: l.split.n_c(),
                nnz_a_ff: l.a_ff.nnz(),
                nnz_a_fc: l.a_fc.nnz(),
                nnz_r: l.r.nnz(),
                nnz_p: l.p.nnz(),
                nnz_aff_inv: l.aff_inv_assembled.as_ref().map_or(0, |m| m.nnz()),
                smoother_order: l.f_smoother.order,
                smoother_effective_order: l.f_smoother.effective_order,
                ddc_converted: l.ddc_passes.iter().map(|d| d.converted).collect(),
            })
            .collect();
        let cs = &h.coarse_solver;
        HierarchySummary {
            num_levels: h.num_levels(),
            nnz_top: h.top_a.nnz(),
            n_top: h.top_a.nrows(),
            truncated_at: h.truncated_at,
            levels,
            coarse: CoarseSummary {
                level: h.levels.len(),
                n: h.coarsest_a.nrows(),
                nnz: h.coarsest_a.nnz(),
                kind: cs.kind,
                order: cs.order,
                effective_order: cs.effective_order,
                num_roots: cs.roots.len(),
            },
            storage_complexity: h.storage_complexity,
            grid_complexity: h.grid_complexity,
            cycle_complexity: h.cycle_complexity,
        }
    }

    /// Entries retained for the solve over entries of the top matrix.
    ///
    /// The top matrix is counted once more for the outer residual, the
    /// coarsest matrix for the coarse solve.
    pub fn recompute_storage_complexity(&self) -> f64 {
        let per_level: usize = self
            .levels
            .iter()
            .map(|l| l.nnz_a_ff + l.nnz_a_fc + l.nnz_r + l.nnz_p + l.nnz_aff_inv)
            .sum();
        (per_level + self.nnz_top + self.coarse.nnz) as f64 / self.nnz_top as f64
    }

    pub fn recompute_grid_complexity(&self) -> f64 {
        let total: usize = self.levels.iter().map(|l| l.n).sum::<usize>() + self.coarse.n;
        total as f64 / self.n_top as f64
    }
}

/// Writes every level's operators as Matrix Market files into `dir`:
/// `level{k}_{R,P,Aff,Afc}.mtx` and `coarsest_A.mtx`.
pub fn dump_levels(h: &Hierarchy, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    for (k, l) in h.levels.iter().enumerate() {
        mtx::write_file(&l.r, dir.join(format!("level{k}_R.mtx")))?;
        mtx::write_file(&l.p, dir.join(format!("level{k}_P.mtx")))?;
        mtx::write_file(&l.a_ff, dir.join(format!("level{k}_Aff.mtx")))?;
        mtx::write_file(&l.a_fc, dir.join(format!("level{k}_Afc.mtx")))?;
    }
    mtx::write_file(&h.coarsest_a, dir.join("coarsest_A.mtx"))
}
