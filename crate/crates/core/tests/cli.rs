//! End-to-end checks of the batch binary: flag handling, output files, and
//! failure modes, all against temporary directories.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ncsense::config::{save_config, SimulationConfig};
use ncsense::occupancy::{save_mask_csv, scenario1_mask};

fn small_cfg() -> SimulationConfig {
    SimulationConfig {
        n_subcarriers: 32,
        n_occupied: 16,
        n_symbols: 8,
        kcv_folds: 4,
        target_range_m: 937.5,
        ..SimulationConfig::default()
    }
}

const SHRINK: &[&str] = &[
    "--set",
    "n_subcarriers=32",
    "--set",
    "n_occupied=16",
    "--set",
    "n_symbols=8",
    "--set",
    "kcv_folds=4",
    "--set",
    "target_range_m=937.5",
];

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncsense"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary should launch")
}

fn read_no_timestamp(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
        .lines()
        .filter(|l| !l.starts_with("# generated_unix"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Splits a CSV body (timestamp already stripped) into header and records.
fn records(body: &str) -> (String, Vec<String>) {
    let mut lines = body.lines();
    let header = lines.next().expect("header line").to_string();
    (header, lines.map(str::to_string).collect())
}

#[test]
fn set_overrides_win_over_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("base.cfg");
    let mut cfg = small_cfg();
    cfg.n_subcarriers = 64;
    cfg.n_occupied = 32;
    save_config(&cfg, &cfg_path).unwrap();

    // The override shrinks the transform back to 32 bins; the emitted range
    // spectrum length shows which value won.
    let out = run_in(
        dir.path(),
        &[
            "estimate",
            "--config",
            "base.cfg",
            "--set",
            "n_subcarriers=32",
            "--set",
            "n_occupied=16",
            "--scenario",
            "s1",
            "--snr-db",
            "10",
            "--seed",
            "1",
            "--method",
            "masked-2dfft",
            "--lambda",
            "0",
            "--emit-spectra",
            "--out",
            "est.csv",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let spectrum = read_no_timestamp(&dir.path().join("est_masked-2dfft_range_spectrum.csv"));
    let (header, rows) = records(&spectrum);
    assert_eq!(header, "bin,value,physical");
    assert_eq!(rows.len(), 32);
}

#[test]
fn estimate_writes_csv_and_json_rows_per_axis() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec![
        "estimate",
        "--scenario",
        "s1",
        "--snr-db",
        "10",
        "--seed",
        "2",
        "--method",
        "jcmsa,plain-2dfft",
        "--lambda",
        "20",
        "--json",
        "--out",
        "est.csv",
    ];
    args.extend_from_slice(SHRINK);
    let out = run_in(dir.path(), &args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let (header, rows) = records(&read_no_timestamp(&dir.path().join("est.csv")));
    assert_eq!(
        header,
        "method,snr_db,seed,axis,estimate,peak_bin,psr_db,solver_iters_total,lambda"
    );
    assert_eq!(rows.len(), 4, "two methods x two axes");
    assert!(rows.iter().any(|r| r.starts_with("jcmsa,10,2,range,937.5,4,")));
    // The transform baseline carries no sparsity weight: trailing field empty.
    assert!(rows.iter().filter(|r| r.starts_with("plain-2dfft,")).all(|r| r.ends_with(',')));

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("est.json")).unwrap())
            .unwrap();
    let outcomes = json.as_array().unwrap();
    assert_eq!(outcomes.len(), 2);
    assert_eq!(outcomes[0]["method"], "jcmsa");
    assert_eq!(outcomes[0]["range"]["estimate"], 937.5);
    assert_eq!(outcomes[0]["lambda_range"], 20.0);
    assert!(outcomes[1]["lambda_range"].is_null());
}

#[test]
fn tuned_estimate_writes_selection_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec![
        "estimate",
        "--scenario",
        "s1",
        "--snr-db",
        "10",
        "--seed",
        "5",
        "--method",
        "jcmsa",
        "--lambda",
        "tune",
        "--out",
        "est.csv",
    ];
    args.extend_from_slice(SHRINK);
    let out = run_in(dir.path(), &args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    for (axis, grid_len) in [("range", 100usize), ("velocity", 250)] {
        let path = dir.path().join(format!("est_jcmsa_kcv_{axis}.csv"));
        let (header, rows) = records(&read_no_timestamp(&path));
        assert_eq!(header, "lambda,score,selected");
        assert_eq!(rows.len(), grid_len, "{axis} grid size");
        assert_eq!(
            rows.iter().filter(|r| r.ends_with(",1")).count(),
            1,
            "{axis} must select exactly one weight"
        );
    }

    // The chosen weights are echoed into the estimate rows.
    let (_, rows) = records(&read_no_timestamp(&dir.path().join("est.csv")));
    for row in &rows {
        assert!(!row.ends_with(','), "tuned rows must record lambda: {row}");
    }
}

#[test]
fn emit_spectra_without_out_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["estimate", "--emit-spectra"];
    args.extend_from_slice(SHRINK);
    let out = run_in(dir.path(), &args);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.starts_with("error:"), "stderr was: {stderr}");
    assert!(stderr.contains("--out"));
}

#[test]
fn mask_files_work_with_fixed_weights_but_not_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let mask = scenario1_mask(&small_cfg()).unwrap();
    save_mask_csv(&mask, &dir.path().join("mask.csv")).unwrap();

    let mut accepted = vec![
        "estimate",
        "--scenario",
        "file:mask.csv",
        "--snr-db",
        "10",
        "--method",
        "jcmsa",
        "--lambda",
        "50",
    ];
    accepted.extend_from_slice(SHRINK);
    let out = run_in(dir.path(), &accepted);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    // The published weights are indexed by canonical scenario, so a custom
    // mask cannot use them.
    let mut refused = vec![
        "estimate",
        "--scenario",
        "file:mask.csv",
        "--snr-db",
        "10",
        "--method",
        "jcmsa",
        "--lambda",
        "table",
    ];
    refused.extend_from_slice(SHRINK);
    let out = run_in(dir.path(), &refused);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn sweep_emits_one_row_per_cell_plus_json_mirror() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec![
        "sweep",
        "--scenario",
        "s1",
        "--snr-db",
        "0,5",
        "--trials",
        "2",
        "--seed",
        "11",
        "--method",
        "masked-2dfft,plain-2dfft",
        "--lambda",
        "table",
        "--json",
        "--out",
        "sweep.csv",
    ];
    args.extend_from_slice(SHRINK);
    let out = run_in(dir.path(), &args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let (header, rows) = records(&read_no_timestamp(&dir.path().join("sweep.csv")));
    assert_eq!(
        header,
        "snr_db,method,trials,failures,rmse_range_m,rmse_velocity_mps,\
         mean_psr_range_db,mean_psr_velocity_db,mean_iterations,lambda_range,lambda_velocity"
    );
    assert_eq!(rows.len(), 4, "two SNRs x two methods");

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sweep.json")).unwrap())
            .unwrap();
    let cells = json.as_array().unwrap();
    assert_eq!(cells.len(), 4);
    for cell in cells {
        assert_eq!(cell["trials"], 2);
        assert_eq!(cell["failures"], 0);
        assert!(cell["lambda_range"].is_null(), "transform methods carry no weight");
        assert!(cell["rmse_range_m"].is_number());
    }
}

#[test]
fn tables_cover_resolutions_bounds_and_optional_gains() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["tables", "--out", "tables.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let body = read_no_timestamp(&dir.path().join("tables.csv"));
    assert!(body.contains("resolution,jcmsa,19.53125,"));
    assert!(body.contains("rmse_bounds,symbol_total,"));
    assert!(body.contains("rmse_bounds,elementary,"));
    assert!(body.contains("0.1875"));
    assert!(body.contains("\ngain,"), "gain section expected by default");

    let out = run_in(dir.path(), &["tables", "--no-gains", "--out", "lean.csv"]);
    assert!(out.status.success());
    let lean = read_no_timestamp(&dir.path().join("lean.csv"));
    assert!(!lean.contains("\ngain,"));
    assert!(lean.contains("rmse_bounds,"));
}

#[test]
fn duration_mode_flag_rescales_the_velocity_readout() {
    let dir = tempfile::tempdir().unwrap();
    let mut estimates = Vec::new();
    for mode in ["elementary", "symbol"] {
        let name = format!("{mode}.csv");
        let mut args = vec![
            "estimate",
            "--scenario",
            "s1",
            "--snr-db",
            "20",
            "--seed",
            "4",
            "--method",
            "masked-2dfft",
            "--lambda",
            "0",
            "--duration-mode",
            mode,
            "--out",
            &name,
        ];
        args.extend_from_slice(SHRINK);
        let out = run_in(dir.path(), &args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let (_, rows) = records(&read_no_timestamp(&dir.path().join(&name)));
        let velocity_row = rows.iter().find(|r| r.contains(",velocity,")).unwrap();
        let fields: Vec<&str> = velocity_row.split(',').collect();
        estimates.push((fields[4].parse::<f64>().unwrap(), fields[5].to_string()));
    }
    // Same peak bin both times; the physical value scales with the inverse
    // of the duration convention (total/elementary = 1.25 at the defaults).
    assert_eq!(estimates[0].1, estimates[1].1);
    if estimates[1].0 != 0.0 {
        let ratio = estimates[0].0 / estimates[1].0;
        assert!((ratio - 1.25).abs() < 0.01, "ratio {ratio}");
    }
}

#[test]
fn bad_inputs_exit_nonzero_with_context() {
    let dir = tempfile::tempdir().unwrap();
    let cases: Vec<(Vec<&str>, &str)> = vec![
        (vec!["estimate", "--set", "mystery_knob=1"], "mystery_knob"),
        (vec!["estimate", "--lambda", "-3"], "lambda"),
        (vec!["estimate", "--scenario", "s7"], "scenario"),
        (
            vec!["estimate", "--set", "n_subcarriers=0"],
            "n_subcarriers",
        ),
        (
            vec!["estimate", "--scenario", "file:absent.csv"],
            "absent.csv",
        ),
    ];
    for (args, needle) in cases {
        let out = run_in(dir.path(), &args);
        assert!(!out.status.success(), "{args:?} should fail");
        let stderr = String::from_utf8_lossy(&out.stderr);
        assert!(stderr.starts_with("error:"), "{args:?} stderr: {stderr}");
        assert!(stderr.contains(needle), "{args:?} stderr lacks {needle}: {stderr}");
    }
}

#[test]
fn relative_output_paths_resolve_in_the_working_directory() {
    let dir = tempfile::tempdir().unwrap();
    let nested = dir.path().join("results");
    std::fs::create_dir(&nested).unwrap();
    let mut args = vec![
        "estimate",
        "--scenario",
        "s2",
        "--snr-db",
        "0",
        "--method",
        "masked-2dfft",
        "--lambda",
        "0",
        "--out",
    ];
    let out_path: PathBuf = ["results", "nested.csv"].iter().collect();
    let out_str = out_path.to_str().unwrap();
    args.push(out_str);
    args.extend_from_slice(SHRINK);
    let out = run_in(dir.path(), &args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(nested.join("nested.csv").exists());
}
