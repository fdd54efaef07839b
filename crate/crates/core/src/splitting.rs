//! Strength of connection and the PMISR + DDC coarse/fine splitting.
//!
//! PMISR picks a maximal independent set of the symmetrized strength graph
//! and makes it the F points, so `A_ff` has no strong off-diagonal
//! couplings. DDC (diagonal dominance cleanup) then turns the least
//! diagonally dominant F points into C points, a fixed fraction per pass.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::{IndexSet, SparseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CfLabel {
    F,
    C,
}

#[derive(Debug, Clone)]
pub struct StrengthGraph {
    /// Strong connections, unit values, no diagonal.
    pub s: SparseMatrix,
    /// Structure of `S + S^T`.
    pub symmetric_closure: SparseMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CfSplit {
    labels: Vec<CfLabel>,
    f_set: IndexSet,
    c_set: IndexSet,
}

impl CfSplit {
    pub fn from_labels(labels: Vec<CfLabel>) -> Self {
        let f: Vec<usize> =
            labels.iter().enumerate().filter(|(_, &l)| l == CfLabel::F).map(|(i, _)| i).collect();
        let c: Vec<usize> =
            labels.iter().enumerate().filter(|(_, &l)| l == CfLabel::C).map(|(i, _)| i).collect();
        CfSplit {
            labels,
            f_set: IndexSet::from_sorted_unchecked(f),
            c_set: IndexSet::from_sorted_unchecked(c),
        }
    }

    pub fn labels(&self) -> &[CfLabel] {
        &self.labels
    }

    pub fn f_set(&self) -> &IndexSet {
        &self.f_set
    }

    pub fn c_set(&self) -> &IndexSet {
        &self.c_set
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn n_f(&self) -> usize {
        self.f_set.len()
    }

    pub fn n_c(&self) -> usize {
        self.c_set.len()
    }

    pub fn is_f(&self, i: usize) -> bool {
        self.labels[i] == CfLabel::F
    }
}

/// `S_ij = 1` iff `j != i` and `|a_ij| >= theta * max_{k != i} |a_ik|`, with
/// zero-valued entries never strong.
pub fn strength_graph(a: &SparseMatrix, theta: f64) -> Result<StrengthGraph> {
    if !a.is_square() {
        return Err(Error::dims("strength_graph", "matrix is not square"));
    }
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidParameter(format!("strong threshold {theta} not in [0, 1]")));
    }
    let n = a.nrows();
    let mut offsets = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(a.nnz());
    offsets.push(0);
    for i in 0..n {
        let (rc, rv) = a.row(i);
        let row_max = rc
            .iter()
            .zip(rv)
            .filter(|(&j, _)| j != i)
            .fold(0.0_f64, |m, (_, v)| m.max(v.abs()));
        if row_max > 0.0 {
            let cut = theta * row_max;
            for (&j, &v) in rc.iter().zip(rv) {
                if j != i && v != 0.0 && v.abs() >= cut {
                    cols.push(j);
                }
            }
        }
        offsets.push(cols.len());
    }
    let vals = vec![1.0; cols.len()];
    let s = SparseMatrix::from_csr_unchecked(n, n, offsets, cols, vals);
    let mut symmetric_closure = s.add_scaled(&s.transpose(), 1.0)?;
    let ones = vec![1.0; symmetric_closure.nnz()];
    symmetric_closure = SparseMatrix::from_csr_unchecked(
        n,
        n,
        symmetric_closure.row_offsets().to_vec(),
        symmetric_closure.col_indices().to_vec(),
        ones,
    );
    Ok(StrengthGraph { s, symmetric_closure })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Undecided,
    F,
    C,
}

/// Luby-style maximal independent set on `S + S^T`; the set becomes F.
///
/// Each node's weight is a uniform draw keyed by `seed` and node index; ties
/// go to the lower index. Rounds are bulk-synchronous. With a loop cap,
/// nodes still undecided afterwards become C.
pub fn pmisr(g: &StrengthGraph, seed: u64, max_luby_loops: Option<usize>) -> CfSplit {
    let adj = &g.symmetric_closure;
    let n = adj.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let beats = |i: usize, j: usize| {
        weights[i] > weights[j] || (weights[i] == weights[j] && i < j)
    };

    let mut state = vec![State::Undecided; n];
    let mut undecided: Vec<usize> = Vec::with_capacity(n);
    for (i, st) in state.iter_mut().enumerate() {
        if adj.row(i).0.iter().all(|&j| j == i) {
            *st = State::F;
        } else {
            undecided.push(i);
        }
    }

    let mut loops = 0usize;
    let mut new_f = Vec::new();
    while !undecided.is_empty() {
        if max_luby_loops.is_some_and(|cap| loops >= cap) {
            break;
        }
        loops += 1;
        new_f.clear();
        for &i in &undecided {
            let wins = adj
                .row(i)
                .0
                .iter()
                .all(|&j| j == i || state[j] != State::Undecided || beats(i, j));
            if wins {
                new_f.push(i);
            }
        }
        for &i in &new_f {
            state[i] = State::F;
        }
        for &i in &new_f {
            for &j in adj.row(i).0 {
                if state[j] == State::Undecided {
                    state[j] = State::C;
                }
            }
        }
        undecided.retain(|&i| state[i] == State::Undecided);
    }

    let labels =
        state.into_iter().map(|s| if s == State::F { CfLabel::F } else { CfLabel::C }).collect();
    CfSplit::from_labels(labels)
}

/// Per-pass DDC diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DdcPassStats {
    pub n_f_before: usize,
    pub converted: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Largest ratio among the F points that remain.
    pub max_ratio_after: f64,
    /// Equal-width bin counts over `[min_ratio, max_ratio]`.
    pub histogram: Vec<usize>,
}

/// Diagonal dominance ratios `sum_{j in F, j != i} |a_ij| / |a_ii|` over the
/// current F block, indexed like `split.f_set()`.
pub fn dominance_ratios(a: &SparseMatrix, split: &CfSplit) -> Result<Vec<f64>> {
    let mut ratios = Vec::with_capacity(split.n_f());
    for i in split.f_set().iter() {
        let (rc, rv) = a.row(i);
        let mut diag = 0.0;
        let mut off = 0.0;
        for (&j, &v) in rc.iter().zip(rv) {
            if j == i {
                diag = v;
            } else if split.is_f(j) {
                off += v.abs();
            }
        }
        if diag == 0.0 {
            return Err(Error::ZeroDiagonal { row: i });
        }
        ratios.push(off / diag.abs());
    }
    Ok(ratios)
}

/// One DDC pass: converts the F points above a cut chosen from an
/// `nbins`-bin histogram of dominance ratios so that the number converted is
/// as close as possible to `fraction * |F|`.
pub fn ddc_pass(
    a: &SparseMatrix,
    split: &CfSplit,
    fraction: f64,
    nbins: usize,
) -> Result<(CfSplit, DdcPassStats)> {
    if !a.is_square() || a.nrows() != split.n() {
        return Err(Error::dims("ddc_pass", "matrix and splitting sizes disagree"));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidParameter(format!("DDC fraction {fraction} not in (0, 1)")));
    }
    if nbins == 0 {
        return Err(Error::InvalidParameter("DDC needs at least one bin".into()));
    }
    let ratios = dominance_ratios(a, split)?;
    let n_f = ratios.len();
    if n_f == 0 {
        let stats = DdcPassStats {
            n_f_before: 0,
            converted: 0,
            min_ratio: 0.0,
            max_ratio: 0.0,
            max_ratio_after: 0.0,
            histogram: vec![0; nbins],
        };
        return Ok((split.clone(), stats));
    }
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (max - min) / nbins as f64;
    let bin_of = |r: f64| -> usize {
        if width > 0.0 {
            (((r - min) / width) as usize).min(nbins - 1)
        } else {
            0
        }
    };
    let mut histogram = vec![0usize; nbins];
    for &r in &ratios {
        histogram[bin_of(r)] += 1;
    }

    // Cutting at the lower edge of bin k converts bins k..nbins; k = nbins converts nothing.
    let target = fraction * n_f as f64;
    let mut best_k = nbins;
    let mut best_dist = target;
    let mut above = 0usize;
    for k in (0..nbins).rev() {
        above += histogram[k];
        let dist = (above as f64 - target).abs();
        if dist < best_dist {
            best_dist = dist;
            best_k = k;
        }
    }

    let mut labels = split.labels().to_vec();
    let mut converted = 0usize;
    let mut max_after = f64::NEG_INFINITY;
    for (&i, &r) in split.f_set().as_slice().iter().zip(&ratios) {
        if bin_of(r) >= best_k {
            labels[i] = CfLabel::C;
            converted += 1;
        }
    }
    let new_split = CfSplit::from_labels(labels);
    if new_split.n_f() > 0 {
        max_after = dominance_ratios(a, &new_split)?.into_iter().fold(max_after, f64::max);
    } else {
        max_after = 0.0;
    }
    let stats = DdcPassStats {
        n_f_before: n_f,
        converted,
        min_ratio: min,
        max_ratio: max,
        max_ratio_after: max_after,
        histogram,
    };
    Ok((new_split, stats))
}

pub const DDC_BINS: usize = 1000;

#[derive(Debug, Clone)]
pub struct SplitOutcome {
    pub split: CfSplit,
    pub ddc_passes: Vec<DdcPassStats>,
}

/// PMISR followed by `ddc_its` DDC passes.
pub fn cf_split(
    a: &SparseMatrix,
    theta: f64,
    ddc_fraction: f64,
    ddc_its: usize,
    seed: u64,
    max_luby_loops: Option<usize>,
) -> Result<SplitOutcome> {
    let g = strength_graph(a, theta)?;
    let mut split = pmisr(&g, seed, max_luby_loops);
    let mut ddc_passes = Vec::with_capacity(ddc_its);
    for _ in 0..ddc_its {
        let (next, stats) = ddc_pass(a, &split, ddc_fraction, DDC_BINS)?;
        split = next;
        ddc_passes.push(stats);
    }
    Ok(SplitOutcome { split, ddc_passes })
}
