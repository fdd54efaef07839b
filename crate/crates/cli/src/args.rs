use std::path::PathBuf;

use airg_core::hierarchy::{estimate_truncate_start_level, ProlongationType, SmoothType};
use airg_core::{AdvectionProblem, InverseType, SetupConfig, SolveConfig};
use anyhow::{bail, Result};
use clap::Parser;

/// Reduction multigrid on upwind advection problems.
///
/// Setup and solve flags map one to one onto the fields of the core
/// `SetupConfig` and `SolveConfig` (snake_case field, kebab-case flag).
/// Unset flags keep the library defaults.
#[derive(Debug, Clone, Parser)]
#[command(name = "airg", version)]
pub struct Cli {
    /// Problem dimension.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub dim: u8,
    /// Grid sizes per dimension; several values run a refinement sweep.
    #[arg(long, value_delimiter = ',', default_values_t = vec![64usize])]
    pub n: Vec<usize>,
    /// Cells in x, overriding --n (single run).
    #[arg(long)]
    pub nx: Option<usize>,
    /// Cells in y, overriding --n (single run, 2D).
    #[arg(long)]
    pub ny: Option<usize>,
    #[arg(long)]
    pub vx: Option<f64>,
    #[arg(long)]
    pub vy: Option<f64>,
    /// Velocity angle in radians; wins over --vx/--vy. Default pi/4.
    #[arg(long)]
    pub angle: Option<f64>,

    #[arg(long)]
    pub strong_threshold: Option<f64>,
    #[arg(long)]
    pub ddc_fraction: Option<f64>,
    #[arg(long)]
    pub ddc_its: Option<usize>,
    #[arg(long)]
    pub max_luby_loops: Option<usize>,
    #[arg(long)]
    pub poly_order: Option<usize>,
    /// arnoldi | neumann
    #[arg(long)]
    pub inverse_type: Option<InverseType>,
    #[arg(long, value_name = "BOOL")]
    pub matrix_free_polys: Option<bool>,
    #[arg(long)]
    pub a_drop: Option<f64>,
    #[arg(long, value_name = "BOOL")]
    pub a_lump: Option<bool>,
    #[arg(long)]
    pub r_drop: Option<f64>,
    #[arg(long)]
    pub coarsest_poly_order: Option<usize>,
    /// arnoldi | newton | neumann
    #[arg(long)]
    pub coarsest_inverse_type: Option<InverseType>,
    /// Tolerance for accepting a truncated hierarchy, or `none`.
    #[arg(long, value_parser = parse_tol)]
    pub auto_truncate_tol: Option<Tol>,
    /// First level tested for truncation, or `auto` to estimate it from the
    /// problem size and coarse order.
    #[arg(long, default_value = "auto", value_parser = parse_level)]
    pub auto_truncate_start_level: StartLevel,
    #[arg(long)]
    pub max_levels: Option<usize>,
    #[arg(long)]
    pub min_coarse_size: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Only `f` is implemented.
    #[arg(long)]
    pub smooth_type: Option<SmoothType>,
    /// Only `one-point` is implemented.
    #[arg(long)]
    pub prolongation_type: Option<ProlongationType>,
    #[arg(long)]
    pub improve_z_its: Option<usize>,
    #[arg(long)]
    pub improve_w_its: Option<usize>,
    #[arg(long)]
    pub inverse_sparsity_order: Option<usize>,

    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub f_smooth_its: Option<usize>,
    #[arg(long, value_name = "BOOL")]
    pub w_injection: Option<bool>,

    /// Also run nAIR (Neumann inverse) with the same splitting options.
    #[arg(long)]
    pub compare_nair: bool,
    /// Timed solves per run.
    #[arg(long, default_value_t = 1)]
    pub repeat: usize,
    /// Time the first solve instead of a second, warmed-up one.
    #[arg(long)]
    pub no_second_solve: bool,

    /// Write the JSON report here; `-` for stdout.
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long)]
    pub history_csv: Option<PathBuf>,
    #[arg(long)]
    pub breakdown_csv: Option<PathBuf>,
    /// Write each problem matrix to DIR/advection_<n>.mtx.
    #[arg(long, value_name = "DIR")]
    pub export_mtx: Option<PathBuf>,
    /// Write level operators of each hierarchy under DIR.
    #[arg(long, value_name = "DIR")]
    pub dump_levels: Option<PathBuf>,
    /// Suppress the per-run summary on stderr.
    #[arg(long, short)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tol {
    Off,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StartLevel {
    Auto,
    Fixed(usize),
}

fn parse_tol(s: &str) -> std::result::Result<Tol, String> {
    if s.eq_ignore_ascii_case("none") || s.eq_ignore_ascii_case("off") {
        return Ok(Tol::Off);
    }
    s.parse::<f64>().map(Tol::Value).map_err(|e| format!("{e} (expected a number or `none`)"))
}

fn parse_level(s: &str) -> std::result::Result<StartLevel, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(StartLevel::Auto);
    }
    s.parse::<usize>().map(StartLevel::Fixed).map_err(|e| format!("{e} (expected an integer or `auto`)"))
}

impl Cli {
    /// Problems to run, sorted by unknown count.
    pub fn problems(&self) -> Result<Vec<AdvectionProblem>> {
        if self.n.is_empty() {
            bail!("--n needs at least one size");
        }
        let single = self.nx.is_some() || self.ny.is_some();
        let sizes: Vec<usize> = if single { vec![self.nx.unwrap_or(self.n[0])] } else { self.n.clone() };
        let mut out = Vec::new();
        for nx in sizes {
            let p = if self.dim == 1 {
                if self.ny.is_some() {
                    bail!("--ny is meaningless with --dim 1");
                }
                AdvectionProblem::new_1d(nx, self.vx.unwrap_or(1.0))
            } else {
                let ny = self.ny.unwrap_or(nx);
                match (self.angle, self.vx, self.vy) {
                    (Some(a), _, _) => AdvectionProblem::from_angle(nx, ny, a),
                    (None, None, None) => AdvectionProblem::from_angle(nx, ny, std::f64::consts::FRAC_PI_4),
                    (None, vx, vy) => AdvectionProblem::new_2d(nx, ny, vx.unwrap_or(0.0), vy.unwrap_or(0.0)),
                }
            };
            p.validate()?;
            out.push(p);
        }
        out.sort_by_key(|p| p.num_unknowns());
        out.dedup();
        Ok(out)
    }

    /// Setup options for a problem with `n` unknowns.
    pub fn setup_config(&self, n: usize) -> Result<SetupConfig> {
        let d = SetupConfig::default();
        let mut c = SetupConfig {
            strong_threshold: self.strong_threshold.unwrap_or(d.strong_threshold),
            ddc_fraction: self.ddc_fraction.unwrap_or(d.ddc_fraction),
            ddc_its: self.ddc_its.unwrap_or(d.ddc_its),
            max_luby_loops: self.max_luby_loops.or(d.max_luby_loops),
            poly_order: self.poly_order.unwrap_or(d.poly_order),
            inverse_type: self.inverse_type.unwrap_or(d.inverse_type),
            matrix_free_polys: self.matrix_free_polys.unwrap_or(d.matrix_free_polys),
            a_drop: self.a_drop.unwrap_or(d.a_drop),
            a_lump: self.a_lump.unwrap_or(d.a_lump),
            r_drop: self.r_drop.unwrap_or(d.r_drop),
            coarsest_poly_order: self.coarsest_poly_order.unwrap_or(d.coarsest_poly_order),
            coarsest_inverse_type: self.coarsest_inverse_type.unwrap_or(d.coarsest_inverse_type),
            auto_truncate_tol: match self.auto_truncate_tol {
                None => d.auto_truncate_tol,
                Some(Tol::Off) => None,
                Some(Tol::Value(v)) => Some(v),
            },
            auto_truncate_start_level: d.auto_truncate_start_level,
            max_levels: self.max_levels.unwrap_or(d.max_levels),
            min_coarse_size: self.min_coarse_size.unwrap_or(d.min_coarse_size),
            seed: self.seed.unwrap_or(d.seed),
            smooth_type: self.smooth_type.unwrap_or(d.smooth_type),
            prolongation_type: self.prolongation_type.unwrap_or(d.prolongation_type),
            improve_z_its: self.improve_z_its.unwrap_or(d.improve_z_its),
            improve_w_its: self.improve_w_its.unwrap_or(d.improve_w_its),
            inverse_sparsity_order: self.inverse_sparsity_order.unwrap_or(d.inverse_sparsity_order),
        };
        c.auto_truncate_start_level = match self.auto_truncate_start_level {
            StartLevel::Auto => estimate_truncate_start_level(n, self.dim as u32, c.coarsest_poly_order),
            StartLevel::Fixed(k) => k,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn solve_config(&self) -> Result<SolveConfig> {
        let d = SolveConfig::default();
        let c = SolveConfig {
            rtol: self.rtol.unwrap_or(d.rtol),
            atol: self.atol.unwrap_or(d.atol),
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            f_smooth_its: self.f_smooth_its.unwrap_or(d.f_smooth_its),
            w_injection: self.w_injection.unwrap_or(d.w_injection),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repeat == 0 {
            bail!("--repeat must be at least 1");
        }
        if self.compare_nair && self.inverse_type == Some(InverseType::Neumann) {
            bail!("--compare-nair already runs nAIR; drop --inverse-type neumann");
        }
        Ok(())
    }
}
