use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{gmres_poly_arnoldi, gmres_poly_newton, neumann_poly, PolySolver};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InverseType {
    Arnoldi,
    Newton,
    Neumann,
}

impl InverseType {
    pub fn as_str(&self) -> &'static str {
        match self {
            InverseType::Arnoldi => "arnoldi",
            InverseType::Newton => "newton",
            InverseType::Neumann => "neumann",
        }
    }

    /// Builds the polynomial of this type on `a`.
    pub fn build(&self, a: &SparseMatrix, order: usize, seed: u64) -> Result<PolySolver> {
        match self {
            InverseType::Arnoldi => gmres_poly_arnoldi(a, order, seed),
            InverseType::Newton => gmres_poly_newton(a, order, seed),
            InverseType::Neumann => neumann_poly(a, order),
        }
    }
}

impl fmt::Display for InverseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InverseType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "arnoldi" => Ok(InverseType::Arnoldi),
            "newton" => Ok(InverseType::Newton),
            "neumann" => Ok(InverseType::Neumann),
            other => Err(Error::InvalidParameter(format!("unknown inverse type '{other}'"))),
        }
    }
}

/// Which points are smoothed on each level. Only `F` is implemented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothType {
    F,
    Fc,
    Fcf,
}

impl FromStr for SmoothType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "f" => Ok(SmoothType::F),
            "fc" => Ok(SmoothType::Fc),
            "fcf" => Ok(SmoothType::Fcf),
            other => Err(Error::InvalidParameter(format!("unknown smooth type '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProlongationType {
    OnePoint,
    ApproxIdeal,
}

impl FromStr for ProlongationType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "one_point" => Ok(ProlongationType::OnePoint),
            "approx_ideal" => Ok(ProlongationType::ApproxIdeal),
            other => Err(Error::InvalidParameter(format!("unknown prolongation type '{other}'"))),
        }
    }
}

/// Hierarchy construction options. Orders are polynomial degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SetupConfig {
    pub strong_threshold: f64,
    pub ddc_fraction: f64,
    pub ddc_its: usize,
    /// Cap on Luby rounds in the PMISR pass; unlimited when `None`.
    pub max_luby_loops: Option<usize>,
    pub poly_order: usize,
    pub inverse_type: InverseType,
    /// Smooth with the polynomial matrix-free; otherwise with the assembled
    /// fixed-sparsity approximation used for the restrictor.
    pub matrix_free_polys: bool,
    pub a_drop: f64,
    pub a_lump: bool,
    pub r_drop: f64,
    pub coarsest_poly_order: usize,
    pub coarsest_inverse_type: InverseType,
    /// Relative residual a tentative coarse solver must reach for the
    /// hierarchy to stop at that level. `None` disables truncation.
    pub auto_truncate_tol: Option<f64>,
    pub auto_truncate_start_level: usize,
    pub max_levels: usize,
    pub min_coarse_size: usize,
    pub seed: u64,
    pub smooth_type: SmoothType,
    pub prolongation_type: ProlongationType,
    pub improve_z_its: usize,
    pub improve_w_its: usize,
    pub inverse_sparsity_order: usize,
}

impl Default for SetupConfig {
    fn default() -> Self {
        SetupConfig {
            strong_threshold: 0.99,
            ddc_fraction: 0.01,
            ddc_its: 2,
            max_luby_loops: None,
            poly_order: 6,
            inverse_type: InverseType::Arnoldi,
            matrix_free_polys: true,
            a_drop: 1e-6,
            a_lump: true,
            r_drop: 0.0,
            coarsest_poly_order: 100,
            coarsest_inverse_type: InverseType::Newton,
            auto_truncate_tol: Some(0.1),
            auto_truncate_start_level: 0,
            max_levels: 300,
            min_coarse_size: 16,
            seed: 0,
            smooth_type: SmoothType::F,
            prolongation_type: ProlongationType::OnePoint,
            improve_z_its: 0,
            improve_w_its: 0,
            inverse_sparsity_order: 1,
        }
    }
}

impl SetupConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(0.0..=1.0).contains(&self.strong_threshold) {
            return bad(format!("strong_threshold {} not in [0, 1]", self.strong_threshold));
        }
        if !(self.ddc_fraction > 0.0 && self.ddc_fraction < 1.0) {
            return bad(format!("ddc_fraction {} not in (0, 1)", self.ddc_fraction));
        }
        for (name, v) in [("a_drop", self.a_drop), ("r_drop", self.r_drop)] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if let Some(t) = self.auto_truncate_tol {
            if !(t >= 0.0 && t.is_finite()) {
                return bad(format!("auto_truncate_tol must be finite and >= 0, got {t}"));
            }
        }
        if self.inverse_type == InverseType::Newton {
            return bad("inverse_type newton cannot be assembled for the restrictor; use arnoldi or neumann".into());
        }
        if self.max_levels == 0 {
            return bad("max_levels must be at least 1".into());
        }
        if self.max_luby_loops == Some(0) {
            return bad("max_luby_loops must be at least 1".into());
        }
        if self.smooth_type != SmoothType::F {
            return Err(Error::Unsupported("only F-point smoothing is implemented".into()));
        }
        if self.prolongation_type != ProlongationType::OnePoint {
            return Err(Error::Unsupported("only one-point prolongation is implemented".into()));
        }
        if self.improve_z_its > 0 || self.improve_w_its > 0 {
            return Err(Error::Unsupported("improve_z_its / improve_w_its must be 0".into()));
        }
        if self.inverse_sparsity_order != 1 {
            return Err(Error::Unsupported("inverse_sparsity_order must be 1".into()));
        }
        Ok(())
    }
}
