use std::path::Path;
use std::process::Command;

use nonlocal_sim::stats::{BaselineReport, SweepReport};
use nonlocal_sim_cli::{parse_config_with_env, serialize_report, Format, Report, CSV_HEADER};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_nonlocal-sim"));
    c.env_remove("NONLOCAL_SIM_SEED");
    c
}

fn run(args: &[&str]) -> (i32, String) {
    let out = bin().args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
    )
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["sweep", "--gamma", "1.0"]).0, 2);
    assert_eq!(run(&["sweep", "--bogus"]).0, 2);
    assert_eq!(run(&["sweep", "--settings", "/nonexistent.json"]).0, 2);
    assert_eq!(run(&[]).0, 2);
}

#[test]
fn no_partial_output_on_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let (code, _) = run(&[
        "sweep",
        "--settings",
        "/nonexistent.json",
        "--out",
        path(&out),
    ]);
    assert_eq!(code, 2);
    assert!(!out.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn verify_components_passes() {
    let (code, stdout) = run(&["verify-components", "--seed", "3"]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.lines().all(|l| l.starts_with("PASS ")));
    assert!(stdout.lines().count() >= 9);
}

#[test]
fn verify_components_flags_literal_ab() {
    let (code, stdout) = run(&["verify-components", "--ab-convention", "literal"]);
    assert_eq!(code, 1);
    assert!(stdout.contains("FAIL flip_identity"));
}

#[test]
fn resample_mode_parses() {
    let cfg =
        parse_config_with_env(["x", "sweep", "--mode", "resample-n", "--n", "16"], None).unwrap();
    assert_eq!(
        cfg.protocol.mode,
        nonlocal_sim::resources::Mode::ResampleN(16)
    );
}

#[test]
fn csv_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let args = [
        "sweep",
        "--random-settings",
        "3",
        "--trials",
        "2000",
        "--seed",
        "4",
        "--format",
        "csv",
        "--out",
        path(&out),
    ];
    run(&args);
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4 * 3 + 1);
    assert_eq!(lines[0], CSV_HEADER);
    let cells: Vec<&str> = lines[1..5]
        .iter()
        .map(|l| l.split(',').nth(6).unwrap())
        .collect();
    assert_eq!(cells, ["pp", "pm", "mp", "mm"]);
}

#[test]
fn json_round_trip_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let (p1, p2) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let base = [
        "sweep",
        "--random-settings",
        "4",
        "--trials",
        "70000",
        "--seed",
        "9",
    ];
    let mut one: Vec<&str> = base.to_vec();
    one.extend(["--threads", "1", "--out", path(&p1)]);
    let mut two: Vec<&str> = base.to_vec();
    two.extend(["--threads", "3", "--out", path(&p2)]);
    run(&one);
    run(&two);
    let (a, b) = (std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    assert_eq!(a, b);

    let text = String::from_utf8(a).unwrap();
    let report: SweepReport = serde_json::from_str(&text).unwrap();
    assert_eq!(report.schema_version, 1);
    assert_eq!(report.config.master_seed, 9);
    let again = serialize_report(&Report::Sweep(report), Format::Json).unwrap();
    assert_eq!(again, text);
    let keys: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("  \""))
        .map(|l| l.trim().split('"').nth(1).unwrap())
        .collect();
    assert_eq!(
        keys,
        [
            "schema_version",
            "config",
            "settings",
            "calibration",
            "summary"
        ]
    );
}

#[test]
fn literal_sweep_reports_identity_violation() {
    let dir = tempfile::tempdir().unwrap();
    let settings = dir.path().join("s.json");
    std::fs::write(
        &settings,
        r#"[{"a": [0.3, 0.5, 0.6], "b": [-0.2, 0.7, 0.4]}, {"a": [0.1, -0.6, 0.5], "b": [0.4, -0.3, 0.8]}]"#,
    )
    .unwrap();
    let out = dir.path().join("r.json");
    let (code, _) = run(&[
        "sweep",
        "--gamma",
        "0.39269908169872414",
        "--ab-convention",
        "literal",
        "--mbox-convention",
        "literal",
        "--settings",
        path(&settings),
        "--trials",
        "5000",
        "--out",
        path(&out),
    ]);
    assert_eq!(code, 1);
    let r: SweepReport = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r.summary.flip_identity_pass, Some(false));
    assert!(r
        .settings
        .iter()
        .all(|s| s.flip_identity_residual.abs() > 1e-6));
}

#[test]
fn compare_conventions_block() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    run(&[
        "sweep",
        "--random-settings",
        "2",
        "--trials",
        "2000",
        "--compare-conventions",
        "--out",
        path(&out),
    ]);
    let r: SweepReport = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let cmp = r.convention_comparison.unwrap();
    assert_eq!(cmp.settings.len(), 2);
    assert_eq!(cmp.summary.flip_identity_pass, Some(false));
}

#[test]
fn baseline_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.csv");
    let (code, _) = run(&[
        "baseline",
        "--random-settings",
        "5",
        "--trials",
        "100000",
        "--seed",
        "2",
        "--format",
        "csv",
        "--out",
        path(&out),
    ]);
    assert_eq!(code, 0);
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 21);
    let (code, stdout) = run(&["baseline", "--random-settings", "2", "--trials", "1000"]);
    assert_eq!(code, 0);
    let r: BaselineReport = serde_json::from_str(&stdout).unwrap();
    assert_eq!(r.settings.len(), 2);
}

#[test]
fn simulate_prints_setting_report() {
    let (code, stdout) = run(&[
        "simulate",
        "--a",
        "0,0,1",
        "--b",
        "0,0,1",
        "--trials",
        "5000",
        "--gamma",
        "0.5235987755982988",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["setting"]["counts"]["total"], 5000);
    // ẑẑ at γ = π/6: the target excludes (+,−) and (−,+).
    let s = &v["setting"];
    assert_eq!(s["pmf_qm"]["p_pm"], 0.0);
    assert_eq!(s["pmf_qm"]["p_mp"], 0.0);
    let leaked = s["counts"]["n_pm"].as_u64().unwrap() + s["counts"]["n_mp"].as_u64().unwrap();
    assert_eq!(s["support_violation"], leaked > 0);
    assert_eq!(s["preflip"]["paper_claim"], 1.0);
}

#[test]
fn env_seed_fallback() {
    let a = bin()
        .args(["simulate", "--trials", "3000"])
        .env("NONLOCAL_SIM_SEED", "11")
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["config"]["master_seed"], 11);
}
