use std::fs;
use std::time::Instant;

use airg_core::hierarchy::dump_levels;
use airg_core::sparse::mtx;
use airg_core::{richardson_solve, setup, AdvectionProblem, Error, InverseType, SolveStats};
use anyhow::{Context, Result};

use crate::args::Cli;
use crate::report::{Method, Report, RunRecord, Timings};

/// Runs every requested problem and method and writes the outputs.
pub fn run(cli: &Cli) -> Result<Report> {
    cli.validate()?;
    let problems = cli.problems()?;
    let solve_cfg = cli.solve_config()?;
    // reject bad setup options before any work
    cli.setup_config(problems[0].num_unknowns())?;

    let mut runs = Vec::new();
    for p in &problems {
        let (a, b) = p.build()?;
        if let Some(dir) = &cli.export_mtx {
            fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
            mtx::write_file(&a, dir.join(format!("advection_{}.mtx", a.nrows())))?;
        }
        let mut methods = vec![Method::Airg];
        if cli.compare_nair {
            methods.push(Method::Nair);
        }
        for method in methods {
            let mut cfg = cli.setup_config(a.nrows())?;
            if method == Method::Nair {
                cfg.inverse_type = InverseType::Neumann;
            }
            let method = if cfg.inverse_type == InverseType::Neumann { Method::Nair } else { method };

            let h = setup(&a, &cfg).with_context(|| format!("setup failed for n = {}", a.nrows()))?;
            if let Some(dir) = &cli.dump_levels {
                let sub = dir.join(format!("{}_{}", method_name(method), a.nrows()));
                fs::create_dir_all(&sub).with_context(|| format!("cannot create {}", sub.display()))?;
                dump_levels(&h, &sub)?;
            }

            let x0 = vec![1.0; a.nrows()];
            let solve = || -> Result<(Option<SolveStats>, f64)> {
                let t = Instant::now();
                match richardson_solve(&h, &b, &x0, &solve_cfg) {
                    Ok((_, s)) => Ok((Some(s), t.elapsed().as_secs_f64())),
                    Err(Error::Diverged { iteration, residual }) => {
                        log::warn!("diverged at iteration {iteration} (residual {residual:e})");
                        Ok((None, t.elapsed().as_secs_f64()))
                    }
                    Err(e) => Err(e.into()),
                }
            };
            let (first, first_time) = solve()?;
            let mut times = Vec::with_capacity(cli.repeat);
            if cli.no_second_solve {
                times.push(first_time);
            }
            while times.len() < cli.repeat {
                times.push(solve()?.1);
            }

            let summary = h.summary();
            let (converged, diverged, history, iterations, flops) = match &first {
                Some(s) => (s.converged, false, s.residual_history.clone(), s.iterations, s.flops_per_cycle),
                None => (false, true, Vec::new(), 0, 0),
            };
            let rel = match (history.first(), history.last()) {
                (Some(&r0), Some(&rk)) if r0 > 0.0 => rk / r0,
                _ => f64::NAN,
            };
            let rec = RunRecord {
                method,
                problem: *p,
                n: a.nrows(),
                nnz: a.nnz(),
                setup_config: cfg,
                solve_config: solve_cfg.clone(),
                converged,
                diverged,
                iterations,
                final_relative_residual: rel,
                residual_history: history,
                num_levels: summary.num_levels,
                truncated_at: summary.truncated_at,
                cycle_complexity: summary.cycle_complexity,
                storage_complexity: summary.storage_complexity,
                grid_complexity: summary.grid_complexity,
                flops_per_cycle: flops,
                levels: summary.levels,
                coarse: summary.coarse,
                timings: Timings {
                    setup: h.timings.clone(),
                    solve_min: times.iter().copied().fold(f64::INFINITY, f64::min),
                    solve_mean: times.iter().sum::<f64>() / times.len() as f64,
                    solve: times,
                    warmed_up: !cli.no_second_solve,
                },
            };
            if !cli.quiet {
                print_line(&rec);
            }
            runs.push(rec);
        }
    }

    let report = Report::new(runs);
    if let Some(path) = &cli.json {
        report.write_json(path)?;
    }
    if let Some(path) = &cli.history_csv {
        report.write_history_csv(path)?;
    }
    if let Some(path) = &cli.breakdown_csv {
        report.write_breakdown_csv(path)?;
    }
    Ok(report)
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Airg => "airg",
        Method::Nair => "nair",
    }
}

fn print_line(r: &RunRecord) {
    let shape = describe(&r.problem);
    eprintln!(
        "{} {shape}: {} in {} its (rel {:.2e}), levels {}{}, cc {:.2}, sc {:.2}, gc {:.2}, setup {:.3} s, solve {:.3} s",
        method_name(r.method),
        if r.converged { "converged" } else if r.diverged { "DIVERGED" } else { "NOT converged" },
        r.iterations,
        r.final_relative_residual,
        r.num_levels,
        r.truncated_at.map(|l| format!(" (truncated at {l})")).unwrap_or_default(),
        r.cycle_complexity,
        r.storage_complexity,
        r.grid_complexity,
        r.timings.setup.total,
        r.timings.solve_min,
    );
}

fn describe(p: &AdvectionProblem) -> String {
    if p.is_1d() {
        format!("1D n={}", p.nx)
    } else {
        format!("2D {}x{}", p.nx, p.ny)
    }
}
