mod common;

use std::f64::consts::FRAC_PI_4;

use airg_core::hierarchy::{build_prolongation, build_restriction, coarse_matrix, setup, SetupConfig, SetupTimings};
use airg_core::problem::{build_advection_1d, AdvectionProblem};
use airg_core::seeds::random_unit_vector;
use airg_core::solve::{richardson_solve, vcycle, SolveConfig};
use airg_core::sparse::SparseMatrix;
use airg_core::splitting::cf_split;
use common::{dense, dense_solve, forward_substitution, rel_diff};
use nalgebra::DMatrix;

fn exact_1d_config() -> SetupConfig {
    SetupConfig { strong_threshold: 0.5, poly_order: 1, auto_truncate_tol: None, ..Default::default() }
}

#[test]
fn one_cycle_is_exact_in_one_dimension() {
    for n in [64, 1024, 4096] {
        let a = build_advection_1d(n, 1.0).unwrap();
        let h = setup(&a, &exact_1d_config()).unwrap();
        let b = random_unit_vector(n, 5);
        let x = vcycle(&h, 0, &b, &SolveConfig::default()).unwrap();
        let want = forward_substitution(&a, &b);
        assert!(rel_diff(&x, &want) < 1e-12, "n = {n}: {}", rel_diff(&x, &want));
    }
}

#[test]
fn richardson_converges_fast_in_exact_limit() {
    let n = 1024;
    let a = build_advection_1d(n, 2.0).unwrap();
    let h = setup(&a, &exact_1d_config()).unwrap();
    let b = random_unit_vector(n, 9);
    let (x, s) = richardson_solve(&h, &b, &vec![1.0; n], &SolveConfig::default()).unwrap();
    assert!(s.converged && s.iterations <= 2);
    assert!(rel_diff(&x, &forward_substitution(&a, &b)) < 1e-10);
}

/// Two-level cycle on the level-0 operators with a dense exact coarse solve.
/// Returns (error after coarse correction, error after F smoothing).
fn two_level_errors(a: &SparseMatrix, cfg: &SetupConfig, e0: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let out = cf_split(a, cfg.strong_threshold, cfg.ddc_fraction, cfg.ddc_its, 3, None).unwrap();
    let split = out.split;
    let mut t = SetupTimings::default();
    let res = build_restriction(a, &split, cfg, 0, &mut t).unwrap();
    let p = build_prolongation(a, &split).unwrap();
    let ac = coarse_matrix(a, &res.r, &p, cfg, &mut t).unwrap();

    // A e = r with known e = e0
    let r = a.spmv(e0).unwrap();
    let rc = res.r.spmv(&r).unwrap();
    let ec = dense_solve(&dense(&ac), &rc);

    let c = split.c_set().as_slice();
    let f = split.f_set().as_slice();
    let mut after_cgc = e0.to_vec();
    for (k, &i) in c.iter().enumerate() {
        after_cgc[i] -= ec[k];
    }
    // F smoothing: e_f = A_ff^{-1} (r_f - A_fc e_c)
    let afc_ec = res.a_fc.spmv(&ec).unwrap();
    let rhs: Vec<f64> = f.iter().zip(&afc_ec).map(|(&i, v)| r[i] - v).collect();
    let ef = res.f_smoother.apply(&res.a_ff, &rhs).unwrap();
    let mut after = after_cgc.clone();
    for (k, &i) in f.iter().enumerate() {
        after[i] = e0[i] - ef[k];
    }
    for &i in f {
        after_cgc[i] = 0.0;
    }
    (after_cgc, after)
}

#[test]
fn ideal_restriction_zeroes_c_point_error() {
    // strong threshold 0 makes the F points independent in the whole graph
    let (a, _) = AdvectionProblem::from_angle(13, 13, FRAC_PI_4).build().unwrap();
    let cfg = SetupConfig { strong_threshold: 0.0, a_drop: 0.0, ..Default::default() };
    let e0 = random_unit_vector(a.nrows(), 21);
    let (c_err, full) = two_level_errors(&a, &cfg, &e0);
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!(norm(&c_err) < 1e-12 * norm(&e0), "{}", norm(&c_err));
    assert!(norm(&full) < 1e-12 * norm(&e0));
}

#[test]
fn galerkin_product_is_schur_complement_with_diagonal_f_block() {
    let (a, _) = AdvectionProblem::new_2d(10, 9, 0.6, 0.8).build().unwrap();
    let cfg = SetupConfig { strong_threshold: 0.0, a_drop: 0.0, ..Default::default() };
    let split = cf_split(&a, 0.0, cfg.ddc_fraction, cfg.ddc_its, 1, None).unwrap().split;
    let mut t = SetupTimings::default();
    let res = build_restriction(&a, &split, &cfg, 0, &mut t).unwrap();
    let p = build_prolongation(&a, &split).unwrap();
    let ac = dense(&coarse_matrix(&a, &res.r, &p, &cfg, &mut t).unwrap());

    let d = dense(&a);
    let (f, c) = (split.f_set().as_slice(), split.c_set().as_slice());
    let block = |rows: &[usize], cols: &[usize]| DMatrix::from_fn(rows.len(), cols.len(), |i, j| d[(rows[i], cols[j])]);
    let aff = block(f, f);
    let schur = block(c, c) - block(c, f) * aff.try_inverse().unwrap() * block(f, c);
    assert!((ac - &schur).abs().max() < 1e-12 * schur.abs().max());
}

#[test]
fn restriction_residual_improves_with_order() {
    let (a, _) = AdvectionProblem::from_angle(16, 16, FRAC_PI_4).build().unwrap();
    let base = SetupConfig::default();
    let split = cf_split(&a, base.strong_threshold, base.ddc_fraction, base.ddc_its, 4, None).unwrap().split;
    let d = dense(&a);
    let (f, c) = (split.f_set().as_slice(), split.c_set().as_slice());
    let block = |rows: &[usize], cols: &[usize]| DMatrix::from_fn(rows.len(), cols.len(), |i, j| d[(rows[i], cols[j])]);
    let (aff, acf) = (block(f, f), block(c, f));
    let mut last = f64::INFINITY;
    for order in 1..=6 {
        let cfg = SetupConfig { poly_order: order, ..base.clone() };
        let res = build_restriction(&a, &split, &cfg, 0, &mut SetupTimings::default()).unwrap();
        let r = dense(&res.r);
        let z = DMatrix::from_fn(c.len(), f.len(), |i, j| r[(i, f[j])]);
        let rel = (&z * &aff + &acf).norm() / acf.norm();
        assert!(rel < 1.0, "order {order}: {rel}");
        assert!(rel <= last * (1.0 + 1e-12), "order {order}: {rel} after {last}");
        last = rel;
    }
}

#[test]
fn levels_shrink_and_link_up() {
    let (a, _) = AdvectionProblem::from_angle(40, 40, FRAC_PI_4).build().unwrap();
    let h = setup(&a, &SetupConfig { auto_truncate_tol: None, ..Default::default() }).unwrap();
    let sizes = h.level_sizes();
    assert!(sizes.windows(2).all(|w| w[1] < w[0]), "{sizes:?}");
    for l in &h.levels {
        assert_eq!(l.a_ff.nrows(), l.split.n_f());
        assert_eq!(l.r.nrows(), l.p.ncols());
        // C rows of P are unit rows, F rows hold at most a single 1
        for i in 0..l.n {
            let (cols, vals) = l.p.row(i);
            assert!(cols.len() <= 1 && vals.iter().all(|&v| v == 1.0));
            if !l.split.is_f(i) {
                assert_eq!(cols.len(), 1);
            }
        }
    }
    assert!(h.cycle_complexity >= 1.0 && h.storage_complexity >= 1.0);
}

#[test]
fn higher_smoother_order_does_not_slow_convergence() {
    let (a, b) = AdvectionProblem::from_angle(48, 48, FRAC_PI_4).build().unwrap();
    let x0 = vec![1.0; a.nrows()];
    let its = |order| {
        let h = setup(&a, &SetupConfig { poly_order: order, auto_truncate_tol: None, ..Default::default() }).unwrap();
        richardson_solve(&h, &b, &x0, &SolveConfig::default()).unwrap().1.iterations
    };
    let (low, high) = (its(1), its(6));
    assert!(high <= low, "order 6 took {high}, order 1 took {low}");
}

#[test]
fn residual_history_decreases_on_default_problem() {
    let (a, b) = AdvectionProblem::from_angle(64, 64, FRAC_PI_4).build().unwrap();
    let h = setup(&a, &SetupConfig { auto_truncate_tol: None, ..Default::default() }).unwrap();
    let (_, s) = richardson_solve(&h, &b, &vec![1.0; a.nrows()], &SolveConfig::default()).unwrap();
    assert!(s.converged);
    assert_eq!(s.residual_history.len(), s.iterations + 1);
    assert!(s.residual_history.windows(2).skip(1).all(|w| w[1] < w[0]));
}

#[test]
fn truncation_matches_untruncated_iterations_on_small_grid() {
    let (a, b) = AdvectionProblem::from_angle(64, 64, FRAC_PI_4).build().unwrap();
    let x0 = vec![1.0; a.nrows()];
    let full = setup(&a, &SetupConfig { auto_truncate_tol: None, ..Default::default() }).unwrap();
    let trunc = setup(&a, &SetupConfig { auto_truncate_start_level: 3, ..Default::default() }).unwrap();
    assert!(trunc.truncated_at.is_some());
    assert!(trunc.num_levels() < full.num_levels());
    let i_full = richardson_solve(&full, &b, &x0, &SolveConfig::default()).unwrap().1.iterations;
    let i_trunc = richardson_solve(&trunc, &b, &x0, &SolveConfig::default()).unwrap().1.iterations;
    assert_eq!(i_full, i_trunc);
}
