use nalgebra::{Complex, DMatrix, DVector, Schur};

use super::arnoldi::ArnoldiProcess;
use super::{PolyKind, PolySolver, Root};
use crate::error::{Error, Result};
use crate::seeds::random_unit_vector;
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Singular values of the Hessenberg block below `rank_tol * sigma_max`
    /// count as zero; the polynomial degree is cut to the numerical rank.
    pub rank_tol: f64,
    /// Add extra copies of roots whose product-of-other-factors is large.
    pub add_roots: bool,
    /// A root gets extra copies once `log10(pof)` exceeds this.
    pub pof_log10_threshold: f64,
    /// One extra copy per this many decades of `pof` above the threshold.
    pub pof_log10_per_copy: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            rank_tol: 1e-12,
            add_roots: true,
            pof_log10_threshold: 4.0,
            pof_log10_per_copy: 14.0,
        }
    }
}

pub fn gmres_poly_newton(a: &SparseMatrix, order: usize, seed: u64) -> Result<PolySolver> {
    gmres_poly_newton_with(a, order, seed, &NewtonOptions::default())
}

/// GMRES polynomial of degree `order` in factored Newton form.
///
/// Runs `order + 1` Arnoldi steps; the harmonic Ritz values of the final
/// Hessenberg matrix are the roots of the GMRES residual polynomial
/// `p(z) = prod (1 - z / theta_i)`, and `q(z) = (1 - p(z)) / z` is applied
/// one factor (or conjugate pair) at a time.
pub fn gmres_poly_newton_with(
    a: &SparseMatrix,
    order: usize,
    seed: u64,
    opts: &NewtonOptions,
) -> Result<PolySolver> {
    if !a.is_square() {
        return Err(Error::dims("gmres_poly_newton", "matrix is not square"));
    }
    if a.nrows() == 0 {
        return Err(Error::Polynomial("empty matrix".into()));
    }
    let b = random_unit_vector(a.nrows(), seed);
    let arn = ArnoldiProcess::run(a, &b, order + 1, false)?;
    let history = arn.least_squares().map(|(_, h)| h).unwrap_or_default();

    let mut k = arn.steps;
    loop {
        let hk = arn.h.view((0, 0), (k, k)).into_owned();
        let sv = hk.singular_values();
        let smax = sv.max();
        if !(smax > 0.0) {
            return Err(Error::Polynomial("Hessenberg matrix is zero".into()));
        }
        let rank = sv.iter().filter(|&&s| s > opts.rank_tol * smax).count();
        if rank == k {
            break;
        }
        k = rank;
    }

    let thetas = harmonic_ritz_values(&arn.h, k)?;
    let mut roots = leja_order(&thetas);
    if opts.add_roots {
        let extra = added_roots(&roots, opts);
        if !extra.is_empty() {
            roots.extend(extra);
            roots = leja_order(&roots);
        }
    }

    let poly = PolySolver {
        kind: PolyKind::NewtonRoots,
        order,
        effective_order: k - 1,
        coeffs: Vec::new(),
        roots,
        inv_diag: None,
        generating_residuals: history,
    };
    poly.validate()?;
    Ok(poly)
}

/// Eigenvalues of `H_k + h_{k+1,k}^2 f e_k^T`, `H_k^T f = e_k`.
fn harmonic_ritz_values(h: &DMatrix<f64>, k: usize) -> Result<Vec<Root>> {
    let mut m = h.view((0, 0), (k, k)).into_owned();
    let sub = h[(k, k - 1)];
    if sub != 0.0 {
        let mut ek = DVector::<f64>::zeros(k);
        ek[k - 1] = 1.0;
        let f = m
            .transpose()
            .lu()
            .solve(&ek)
            .ok_or_else(|| Error::Polynomial("singular Hessenberg block".into()))?;
        let s2 = sub * sub;
        for i in 0..k {
            m[(i, k - 1)] += s2 * f[i];
        }
    }
    let schur = Schur::try_new(m, f64::EPSILON, 100_000)
        .ok_or_else(|| Error::Polynomial("Schur iteration did not converge".into()))?;
    let eig: Vec<Complex<f64>> = schur.complex_eigenvalues().iter().copied().collect();

    let mut roots = Vec::with_capacity(k);
    let mut n_neg = 0usize;
    for z in &eig {
        if !(z.re.is_finite() && z.im.is_finite()) || (z.re == 0.0 && z.im == 0.0) {
            return Err(Error::Polynomial(format!("unusable harmonic Ritz value {z}")));
        }
        if z.im == 0.0 {
            roots.push(Root::real(z.re));
        } else if z.im > 0.0 {
            roots.push(Root { re: z.re, im: z.im });
            roots.push(Root { re: z.re, im: -z.im });
        } else {
            n_neg += 1;
        }
    }
    if roots.len() != k || n_neg * 2 + roots.iter().filter(|r| r.is_real()).count() != k {
        return Err(Error::Polynomial("complex harmonic Ritz values are not conjugate-paired".into()));
    }
    Ok(roots)
}

fn log_abs_diff(a: Root, b: Root) -> f64 {
    (a.re - b.re).hypot(a.im - b.im).ln()
}

/// Modified Leja ordering: start from the largest modulus, then repeatedly take
/// the root maximizing the product of distances to those already placed.
/// Conjugate pairs are placed together, positive imaginary part first.
pub fn leja_order(roots: &[Root]) -> Vec<Root> {
    let mut pending: Vec<Root> = roots.iter().copied().filter(|r| r.im >= 0.0).collect();
    let mut placed: Vec<Root> = Vec::with_capacity(roots.len());
    let mut score = vec![0.0_f64; pending.len()];
    let place = |r: Root, placed: &mut Vec<Root>| {
        placed.push(r);
        if !r.is_real() {
            placed.push(Root { re: r.re, im: -r.im });
        }
    };

    if pending.is_empty() {
        return placed;
    }
    let first = pending
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, r)| {
            let m = r.modulus_sq();
            if m > best.1 {
                (i, m)
            } else {
                best
            }
        })
        .0;
    let mut newly = placed.len();
    place(pending.remove(first), &mut placed);
    score.remove(first);

    while !pending.is_empty() {
        for (s, r) in score.iter_mut().zip(&pending) {
            for p in &placed[newly..] {
                *s += log_abs_diff(*r, *p);
            }
        }
        newly = placed.len();
        let mut best = 0;
        for i in 1..pending.len() {
            if score[i] > score[best] || score[best].is_nan() {
                best = i;
            }
        }
        place(pending.remove(best), &mut placed);
        score.remove(best);
    }
    placed
}

/// Extra root copies for factors whose product over the other roots,
/// `pof(k) = prod_{i != k} |1 - theta_k / theta_i|`, is large enough to
/// threaten stability of the factored application.
fn added_roots(roots: &[Root], opts: &NewtonOptions) -> Vec<Root> {
    let mut extra = Vec::new();
    for (k, &tk) in roots.iter().enumerate() {
        if tk.im < 0.0 {
            continue;
        }
        let mut log10_pof = 0.0;
        for (i, &ti) in roots.iter().enumerate() {
            if i == k {
                continue;
            }
            // |1 - tk/ti| = |ti - tk| / |ti|
            let d = (ti.re - tk.re).hypot(ti.im - tk.im);
            log10_pof += d.log10() - ti.modulus_sq().sqrt().log10();
        }
        if log10_pof > opts.pof_log10_threshold {
            let copies = ((log10_pof - opts.pof_log10_threshold) / opts.pof_log10_per_copy).ceil();
            for _ in 0..copies as usize {
                extra.push(tk);
                if !tk.is_real() {
                    extra.push(Root { re: tk.re, im: -tk.im });
                }
            }
        }
    }
    extra
}
