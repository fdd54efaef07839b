//! Result records and their JSON / CSV encodings.
//!
//! Everything measured in wall time lives under `timings` so that two runs
//! with the same configuration produce identical reports once that field is
//! removed.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use airg_core::hierarchy::{CoarseSummary, LevelSummary};
use airg_core::{AdvectionProblem, SetupConfig, SetupTimings, SolveConfig};
use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Airg,
    Nair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub runs: Vec<RunRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: Method,
    pub problem: AdvectionProblem,
    pub n: usize,
    pub nnz: usize,
    pub setup_config: SetupConfig,
    pub solve_config: SolveConfig,
    pub converged: bool,
    pub diverged: bool,
    pub iterations: usize,
    pub final_relative_residual: f64,
    pub residual_history: Vec<f64>,
    pub num_levels: usize,
    pub truncated_at: Option<usize>,
    pub cycle_complexity: f64,
    pub storage_complexity: f64,
    pub grid_complexity: f64,
    pub flops_per_cycle: u64,
    pub levels: Vec<LevelSummary>,
    pub coarse: CoarseSummary,
    pub timings: Timings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub setup: SetupTimings,
    /// Seconds per timed solve.
    pub solve: Vec<f64>,
    pub solve_min: f64,
    pub solve_mean: f64,
    /// Whether an untimed warm-up solve preceded the timed ones.
    pub warmed_up: bool,
}

impl Report {
    pub fn new(mut runs: Vec<RunRecord>) -> Self {
        runs.sort_by_key(|r| (r.n, r.method == Method::Nair));
        Report { schema_version: SCHEMA_VERSION, runs }
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        if path.as_os_str() == "-" {
            println!("{text}");
            return Ok(());
        }
        let mut f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        writeln!(f, "{text}").with_context(|| format!("cannot write {}", path.display()))?;
        Ok(())
    }

    /// Columns: `n, method, iteration, residual, relative_residual`.
    pub fn write_history_csv(&self, path: &Path) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            n: usize,
            method: Method,
            iteration: usize,
            residual: f64,
            relative_residual: f64,
        }
        let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))?;
        for r in &self.runs {
            let r0 = r.residual_history.first().copied().unwrap_or(1.0);
            for (k, &res) in r.residual_history.iter().enumerate() {
                let rel = if r0 > 0.0 { res / r0 } else { 0.0 };
                w.serialize(Row { n: r.n, method: r.method, iteration: k, residual: res, relative_residual: rel })?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// One row per run with the setup components, their sum and the total.
    pub fn write_breakdown_csv(&self, path: &Path) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            n: usize,
            method: Method,
            iterations: usize,
            cf_split: f64,
            prolongator: f64,
            polynomial: f64,
            spgemm_r: f64,
            spgemm_coarse: f64,
            extract: f64,
            drop: f64,
            truncation: f64,
            coarse_solver: f64,
            component_sum: f64,
            setup_total: f64,
            solve_min: f64,
        }
        let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))?;
        for r in &self.runs {
            let t = &r.timings.setup;
            w.serialize(Row {
                n: r.n,
                method: r.method,
                iterations: r.iterations,
                cf_split: t.cf_split,
                prolongator: t.prolongator,
                polynomial: t.polynomial,
                spgemm_r: t.spgemm_r,
                spgemm_coarse: t.spgemm_coarse,
                extract: t.extract,
                drop: t.drop,
                truncation: t.truncation,
                coarse_solver: t.coarse_solver,
                component_sum: t.component_sum(),
                setup_total: t.total,
                solve_min: r.timings.solve_min,
            })?;
        }
        w.flush()?;
        Ok(())
    }
}
