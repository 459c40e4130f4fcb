//! End-to-end tests of the command-line binary: exit codes, error JSON,
//! artifact files, and determinism across worker counts.

use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_starcomb")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).unwrap_or_else(|e| {
        panic!("stderr is not JSON ({e}): {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn validate_reports_scheme_and_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("golden_quick.json");
    let out = run(&["validate", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert!((v["det_abs"].as_f64().unwrap() - 5f64.sqrt()).abs() < 1e-12);
    assert_eq!(v["weight"]["admissible"], Value::Bool(true));
    let file: Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("validate.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(file["denseness_ok"], Value::Bool(true));
}

#[test]
fn unknown_config_field_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("bad_unknown_field.json");
    let out = run(&["validate", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    let e = stderr_json(&out);
    assert_eq!(e["error"]["kind"], Value::String("config".into()));
    assert_eq!(e["error"]["code"], Value::String("parse".into()));
}

#[test]
fn missing_config_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["density", "--config", "/nonexistent/r.json", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    assert_eq!(stderr_json(&out)["error"]["code"], Value::String("io".into()));
}

#[test]
fn non_injective_basis_exits_three_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("bad_not_injective.json");
    let out = run(&["validate", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(exit_code(&out), 3);
    let e = stderr_json(&out);
    assert_eq!(e["error"]["kind"], Value::String("domain".into()));
    assert_eq!(e["error"]["code"], Value::String("injectivity_failed".into()));
    assert!(e["error"]["message"].as_str().unwrap().contains("witness"));
}

#[test]
fn sharp_window_density_works_but_diffract_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("sharp_quick.json");
    let ok = run(&["density", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(exit_code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    let v = stdout_json(&ok);
    assert!((v["closed_abs"].as_f64().unwrap() - 1.0 / 5f64.sqrt()).abs() < 1e-12);

    let bad = run(&["diffract", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(exit_code(&bad), 3);
    assert_eq!(
        stderr_json(&bad)["error"]["code"],
        Value::String("non_smooth_weight".into())
    );
}

#[test]
fn generate_csv_matches_summary_and_ignores_worker_count() {
    let dir1 = tempfile::tempdir().unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    let cfg = fixture("golden_quick.json");
    let a = run(&[
        "generate", "--config", cfg.to_str().unwrap(),
        "--out", dir1.path().to_str().unwrap(), "--workers", "1",
    ]);
    let b = run(&[
        "generate", "--config", cfg.to_str().unwrap(),
        "--out", dir2.path().to_str().unwrap(), "--workers", "7",
    ]);
    assert_eq!(exit_code(&a), 0);
    assert_eq!(exit_code(&b), 0);
    let csv_a = std::fs::read(dir1.path().join("comb.csv")).unwrap();
    let csv_b = std::fs::read(dir2.path().join("comb.csv")).unwrap();
    assert_eq!(csv_a, csv_b, "comb.csv differs across worker counts");

    let text = String::from_utf8(csv_a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "position_1,weight_re,weight_im");
    let rows = lines.count();
    let atom_count = stdout_json(&a)["atom_count"].as_u64().unwrap() as usize;
    assert_eq!(rows, atom_count);
}

#[test]
fn autocorr_csv_descends_in_modulus_and_leads_with_origin() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("golden_quick.json");
    let out = run(&["autocorr", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
    let text = std::fs::read_to_string(dir.path().join("autocorr.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "u_1,coeff_re,coeff_im");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert!(!rows.is_empty());
    assert!(rows[0][0].abs() < 1e-12, "first row is u = 0");
    assert!((rows[0][1] - 0.1f64.sqrt()).abs() < 1e-9);
    let moduli: Vec<f64> =
        rows.iter().map(|r| (r[1] * r[1] + r[2] * r[2]).sqrt()).collect();
    for pair in moduli.windows(2) {
        assert!(pair[0] >= pair[1] - 1e-12, "moduli not sorted: {pair:?}");
    }
}

#[test]
fn diffract_csv_has_central_peak_intensity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("golden_quick.json");
    let out = run(&["diffract", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
    let text = std::fs::read_to_string(dir.path().join("peaks.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "k_1,z_1,z_2,eta_1,amplitude_re,amplitude_im,intensity"
    );
    let central: Vec<&str> = lines
        .find(|l| l.split(',').next().unwrap().parse::<f64>().unwrap().abs() < 1e-12)
        .expect("central peak present")
        .split(',')
        .collect();
    let intensity: f64 = central[6].parse().unwrap();
    assert!((intensity - 0.2).abs() < 1e-10, "central intensity {intensity}");
}

#[test]
fn compare_quick_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("golden_quick.json");
    let out = run(&["compare", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let report: Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("compare.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["all_pass"], Value::Bool(true));
    assert!(report["quantities"].as_array().unwrap().len() >= 2 + 5 + 4);
}

#[test]
fn compare_impossible_tolerance_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg: Value = serde_json::from_str(
        &std::fs::read_to_string(fixture("golden_quick.json")).unwrap(),
    )
    .unwrap();
    cfg["thresholds"]["density_rel_tol"] = serde_json::json!(1e-15);
    let path = dir.path().join("impossible.json");
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let out = run(&["compare", "--config", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(exit_code(&out), 4);
    let report: Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("compare.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["all_pass"], Value::Bool(false));
}

#[test]
fn almost_periods_csv_lists_verified_translations() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("golden_quick.json");
    let out = run(&["almost-periods", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert!(v["verified_count"].as_u64().unwrap() >= 3);
    let text = std::fs::read_to_string(dir.path().join("almost_periods.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t_1,z_1,z_2,internal_norm,verified_sup");
    assert_eq!(lines.count(), v["verified_count"].as_u64().unwrap() as usize);
}

#[test]
fn injectivity_reports_positive_for_golden() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("golden_quick.json");
    let out = run(&["injectivity", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["injective"], Value::Bool(true));
    assert!(dir.path().join("injectivity.json").is_file());
}

#[test]
fn fourier_bohr_csv_written_with_expected_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("golden_quick.json");
    let out = run(&["fourier-bohr", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
    let text = std::fs::read_to_string(dir.path().join("fourier_bohr.csv")).unwrap();
    assert!(text.starts_with(
        "k_1,kind,volume,estimate_re,estimate_im,estimate_abs,closed_re,closed_im,abs_err"
    ));
    assert!(text.lines().count() > 1);
}
