use std::path::Path;
use std::process::{Command, Output};

fn pflow(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pflow"))
        .arg("--out")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.cfg");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn body(path: &Path) -> String {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
}

#[test]
fn stationary_writes_profile_and_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let out = pflow(dir.path(), &["stationary"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("stationary_summary.json")).unwrap()).unwrap();
    let h = summary["H"].as_f64().unwrap();
    assert!(h > std::f64::consts::FRAC_PI_2 && h < std::f64::consts::PI);
    assert_eq!(summary["format_version"], "pflow-artifact/1");
    assert_eq!(summary["config"]["p"], "1.5");
    let csv = std::fs::read_to_string(dir.path().join("stationary_profile.csv")).unwrap();
    assert!(csv.starts_with("# format_version = pflow-artifact/1\n"));
    assert!(csv.lines().any(|l| l == "r,h,r_h_r"));
}

#[test]
fn verify_passes_on_coarse_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "verify_ns = 300\nverify_np = 25\n");
    let out = pflow(dir.path(), &["--config", &cfg, "verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("verify_report.json")).unwrap()).unwrap();
    assert_eq!(report["all_pass"], true);
    assert!(dir.path().join("verify_worst.csv").exists());
}

#[test]
fn verify_fails_with_code_four_below_the_negativity_range() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "verify_ns = 50\nverify_np = 10\nverify_a_min = 0.5\n");
    let out = pflow(dir.path(), &["--config", &cfg, "verify"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("g_negative"));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "p = 2.0\n");
    assert_eq!(pflow(dir.path(), &["--config", &cfg, "stationary"]).status.code(), Some(2));
    let cfg = write_config(dir.path(), "p = 1.5\nwidth = 3\n");
    let out = pflow(dir.path(), &["--config", &cfg, "stationary"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn unknown_commands_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    assert_ne!(pflow(dir.path(), &["bogus"]).status.code(), Some(0));
    let out = pflow(dir.path(), &["preset", "nope"]);
    assert_ne!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("blowup-generic"));
}

#[test]
fn subsolution_reports_positive_speed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sub_nt = 30\nsub_nr = 30\n");
    let out = pflow(dir.path(), &["--config", &cfg, "subsolution"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("subsolution_summary.json")).unwrap()).unwrap();
    assert!(s["delta0"].as_f64().unwrap() > 0.0);
    assert!(s["blowup_min_residual_at_half_delta0"].as_f64().unwrap() >= 0.0);
    assert_eq!(body(&dir.path().join("subsolution_blowup.csv")).lines().count(), 1 + 30 * 30);
}

#[test]
fn nongeneric_preset_blows_up() {
    let dir = tempfile::tempdir().unwrap();
    let out = pflow(dir.path(), &["preset", "blowup-nongeneric"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("preset_blowup-nongeneric_report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(rep["outcome"], "BlewUp");
    assert_eq!(rep["matches_expected"], true);
    assert!(rep["blowup_time_estimate"].as_f64().unwrap().is_finite());
}

#[test]
fn evolve_reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let text = "n = 65\nt_max = 0.05\n";
    for dir in [&a, &b] {
        let cfg = write_config(dir.path(), text);
        let out = pflow(dir.path(), &["--config", &cfg, "evolve"]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["evolve_diagnostics.csv", "evolve_final.csv"] {
        let x = body(&a.path().join(name));
        assert!(x.starts_with("t,hr0,sup_rhr,d1,d2,dist,dt") || x.starts_with("r,h,u"));
        assert_eq!(x, body(&b.path().join(name)));
    }
}
