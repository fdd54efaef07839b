//! Upwind finite-difference advection test problems.
//!
//! Unknowns are cell values on an `nx x ny` structured grid, numbered
//! row-major with x fastest. The stencil is non-dimensionalized by the mesh
//! spacing, so interior values do not change under refinement. Inflow comes
//! from the west and south boundaries (first-quadrant velocity) with zero
//! boundary data, so the right-hand side is identically zero and the
//! operator is lower triangular in this numbering.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdvectionProblem {
    pub nx: usize,
    /// 0 selects the 1D problem.
    pub ny: usize,
    pub vx: f64,
    pub vy: f64,
    /// Domain lengths; metadata only.
    pub lx: f64,
    pub ly: f64,
}

impl AdvectionProblem {
    pub fn new_2d(nx: usize, ny: usize, vx: f64, vy: f64) -> Self {
        AdvectionProblem { nx, ny, vx, vy, lx: 1.0, ly: 1.0 }
    }

    /// Velocity `(cos angle, sin angle)`.
    pub fn from_angle(nx: usize, ny: usize, angle: f64) -> Self {
        Self::new_2d(nx, ny, angle.cos(), angle.sin())
    }

    pub fn new_1d(n: usize, vx: f64) -> Self {
        AdvectionProblem { nx: n, ny: 0, vx, vy: 0.0, lx: 1.0, ly: 0.0 }
    }

    pub fn is_1d(&self) -> bool {
        self.ny == 0
    }

    pub fn num_unknowns(&self) -> usize {
        self.nx * self.ny.max(1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.vx.is_finite() && self.vy.is_finite()) {
            return Err(Error::InvalidParameter("velocity must be finite".into()));
        }
        if self.vx < 0.0 || self.vy < 0.0 || self.vx + self.vy <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "velocity ({}, {}) must lie in the first quadrant with vx + vy > 0",
                self.vx, self.vy
            )));
        }
        if self.nx == 0 {
            return Err(Error::InvalidParameter("nx must be >= 1".into()));
        }
        if self.is_1d() && self.vx <= 0.0 {
            return Err(Error::InvalidParameter("1D problem needs vx > 0".into()));
        }
        Ok(())
    }

    /// Assembles the operator and right-hand side.
    pub fn build(&self) -> Result<(SparseMatrix, Vec<f64>)> {
        self.validate()?;
        if self.is_1d() {
            let a = build_advection_1d(self.nx, self.vx)?;
            let n = a.nrows();
            Ok((a, vec![0.0; n]))
        } else {
            build_advection_2d(self)
        }
    }
}

/// 2D upwind operator: diagonal `vx + vy`, west `-vx`, south `-vy`; terms
/// that would reach outside the domain are omitted.
pub fn build_advection_2d(p: &AdvectionProblem) -> Result<(SparseMatrix, Vec<f64>)> {
    p.validate()?;
    let ny = p.ny.max(1);
    let nx = p.nx;
    let n = nx * ny;
    let diag = p.vx + p.vy;
    let mut offsets = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(3 * n);
    let mut vals = Vec::with_capacity(3 * n);
    offsets.push(0);
    for j in 0..ny {
        for i in 0..nx {
            let row = j * nx + i;
            if j > 0 && p.vy != 0.0 {
                cols.push(row - nx);
                vals.push(-p.vy);
            }
            if i > 0 && p.vx != 0.0 {
                cols.push(row - 1);
                vals.push(-p.vx);
            }
            cols.push(row);
            vals.push(diag);
            offsets.push(cols.len());
        }
    }
    let a = SparseMatrix::from_csr(n, n, offsets, cols, vals)?;
    Ok((a, vec![0.0; n]))
}

/// Lower bidiagonal 1D upwind operator: diagonal `vx`, subdiagonal `-vx`.
pub fn build_advection_1d(n: usize, vx: f64) -> Result<SparseMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    if !(vx > 0.0) || !vx.is_finite() {
        return Err(Error::InvalidParameter(format!("vx = {vx} must be positive")));
    }
    let mut offsets = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(2 * n);
    let mut vals = Vec::with_capacity(2 * n);
    offsets.push(0);
    for i in 0..n {
        if i > 0 {
            cols.push(i - 1);
            vals.push(-vx);
        }
        cols.push(i);
        vals.push(vx);
        offsets.push(cols.len());
    }
    SparseMatrix::from_csr(n, n, offsets, cols, vals)
}
