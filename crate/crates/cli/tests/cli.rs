use std::collections::BTreeSet;
use std::path::Path;
use std::process::{Command, Output};

use airg_cli::Cli;
use airg_core::{SetupConfig, SolveConfig};
use clap::CommandFactory;
use serde_json::Value;

fn airg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_airg")).args(args).arg("--quiet").output().expect("failed to start airg")
}

fn run_json(dir: &Path, name: &str, args: &[&str]) -> (i32, Value) {
    let path = dir.join(name);
    let mut all = args.to_vec();
    all.extend(["--json", path.to_str().unwrap()]);
    let out = airg(&all);
    let code = out.status.code().unwrap();
    let text = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("no report: {}", String::from_utf8_lossy(&out.stderr)));
    (code, serde_json::from_str(&text).unwrap())
}

fn config_keys() -> BTreeSet<String> {
    let mut keys = BTreeSet::new();
    for v in [serde_json::to_value(SetupConfig::default()).unwrap(), serde_json::to_value(SolveConfig::default()).unwrap()] {
        keys.extend(v.as_object().unwrap().keys().cloned());
    }
    keys
}

#[test]
fn every_config_field_has_a_flag_and_a_docs_row() {
    let flags: BTreeSet<String> = Cli::command().get_arguments().filter_map(|a| a.get_long().map(str::to_string)).collect();
    let readme = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../README.md")).unwrap();
    for key in config_keys() {
        let flag = key.replace('_', "-");
        assert!(flags.contains(&flag), "no --{flag} for field {key}");
        assert!(readme.contains(&format!("| `--{flag}` | `{key}` |")), "README flag table misses {key}");
    }
}

#[test]
fn one_dimensional_cyclic_reduction_limit() {
    let dir = tempfile::tempdir().unwrap();
    let (code, v) =
        run_json(dir.path(), "r.json", &["--dim", "1", "--n", "256", "--vx", "1", "--strong-threshold", "0.5", "--poly-order", "1"]);
    assert_eq!(code, 0);
    let run = &v["runs"][0];
    assert_eq!(run["converged"], true);
    assert!(run["iterations"].as_u64().unwrap() <= 2);
}

#[test]
fn two_dimensional_default_report_schema() {
    let dir = tempfile::tempdir().unwrap();
    let (code, v) = run_json(dir.path(), "r.json", &["--dim", "2", "--n", "256", "--angle", "0.7853981633974483"]);
    assert_eq!(code, 0);
    assert_eq!(v["schema_version"], 1);
    let run = &v["runs"][0];
    assert_eq!(run["converged"], true);
    for key in ["cycle_complexity", "storage_complexity", "grid_complexity", "iterations", "levels", "coarse", "residual_history"] {
        assert!(!run[key].is_null(), "missing {key}");
    }
    for key in ["setup", "solve", "solve_min", "solve_mean"] {
        assert!(!run["timings"][key].is_null(), "missing timings.{key}");
    }
    assert_eq!(run["levels"].as_array().unwrap().len() + 1, run["num_levels"].as_u64().unwrap() as usize);
}

#[test]
fn nair_pair_needs_at_least_as_many_iterations() {
    let dir = tempfile::tempdir().unwrap();
    let (code, v) = run_json(dir.path(), "r.json", &["--n", "256", "--seed", "3", "--compare-nair", "--no-second-solve"]);
    assert_eq!(code, 0);
    let runs = v["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 2);
    assert_eq!((runs[0]["method"].as_str(), runs[1]["method"].as_str()), (Some("airg"), Some("nair")));
    assert_eq!(runs[0]["setup_config"]["seed"], runs[1]["setup_config"]["seed"]);
    assert!(runs[1]["iterations"].as_u64() >= runs[0]["iterations"].as_u64());
}

#[test]
fn reports_match_apart_from_timings() {
    let dir = tempfile::tempdir().unwrap();
    let strip = |mut v: Value| {
        for r in v["runs"].as_array_mut().unwrap() {
            r.as_object_mut().unwrap().remove("timings");
        }
        serde_json::to_string(&v).unwrap()
    };
    let (_, a) = run_json(dir.path(), "a.json", &["--n", "40", "--seed", "11"]);
    let (_, b) = run_json(dir.path(), "b.json", &["--n", "40", "--seed", "11"]);
    assert_eq!(strip(a), strip(b));
}

#[test]
fn sweep_rows_sorted_and_breakdown_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let bd = dir.path().join("bd.csv");
    let hist = dir.path().join("hist.csv");
    let (code, v) = run_json(
        dir.path(),
        "r.json",
        &["--n", "96,32,64", "--breakdown-csv", bd.to_str().unwrap(), "--history-csv", hist.to_str().unwrap()],
    );
    assert_eq!(code, 0);
    let ns: Vec<u64> = v["runs"].as_array().unwrap().iter().map(|r| r["n"].as_u64().unwrap()).collect();
    assert_eq!(ns, vec![32 * 32, 64 * 64, 96 * 96]);

    let mut rd = csv::Reader::from_path(&bd).unwrap();
    let headers = rd.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    let csv_ns: Vec<u64> = rows.iter().map(|r| r[col("n")].parse().unwrap()).collect();
    assert_eq!(csv_ns, ns);
    for r in &rows {
        let parts = ["cf_split", "prolongator", "polynomial", "spgemm_r", "spgemm_coarse", "extract", "drop", "truncation"];
        let sum: f64 = parts.iter().map(|p| r[col(p)].parse::<f64>().unwrap()).sum::<f64>()
            + r[col("coarse_solver")].parse::<f64>().unwrap();
        let total: f64 = r[col("setup_total")].parse().unwrap();
        assert!((sum - total).abs() <= 0.05 * total, "components {sum} vs total {total}");
    }

    let mut rh = csv::Reader::from_path(&hist).unwrap();
    assert_eq!(rh.headers().unwrap().iter().collect::<Vec<_>>(), ["n", "method", "iteration", "residual", "relative_residual"]);
    let expected: usize = v["runs"].as_array().unwrap().iter().map(|r| r["residual_history"].as_array().unwrap().len()).sum();
    assert_eq!(rh.records().count(), expected);
}

#[test]
fn single_record_gives_header_plus_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let bd = dir.path().join("bd.csv");
    assert_eq!(airg(&["--n", "24", "--breakdown-csv", bd.to_str().unwrap()]).status.code(), Some(0));
    let text = std::fs::read_to_string(&bd).unwrap();
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn exit_codes() {
    assert_eq!(airg(&["--n", "24", "--strong-threshold", "1.5"]).status.code(), Some(1));
    assert_eq!(airg(&["--n", "24", "--smooth-type", "fcf"]).status.code(), Some(1));
    assert_eq!(airg(&["--n", "24", "--inverse-type", "newton"]).status.code(), Some(1));
    assert_eq!(airg(&["--n", "24", "--bogus"]).status.code(), Some(1));
    assert_eq!(airg(&["--auto-truncate-tol", "loose"]).status.code(), Some(1));
    assert_eq!(airg(&["--n", "48", "--max-iters", "1"]).status.code(), Some(2));
    let out = airg(&["--n", "24", "--json", "/nonexistent-dir/x/r.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot create"));
}

#[test]
fn matrix_export_and_level_dump() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = dir.path().join("mtx");
    let lv = dir.path().join("levels");
    let out = airg(&["--n", "20", "--auto-truncate-tol", "none", "--export-mtx", mtx.to_str().unwrap(), "--dump-levels", lv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let a = airg_core::sparse::mtx::read_file(mtx.join("advection_400.mtx")).unwrap();
    assert_eq!(a.nrows(), 400);
    let sub = lv.join("airg_400");
    assert!(sub.join("level0_R.mtx").exists() && sub.join("coarsest_A.mtx").exists());
}
