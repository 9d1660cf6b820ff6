//! End-to-end checks of the installed binary: exit codes, artifact formats
//! and byte-level determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_nfcomb");

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nfcomb_cli_{name}"));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn repo_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary should launch")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn simulate_writes_deterministic_artifacts() {
    let dir = workdir("determinism");
    let cfg = repo_config("predetermined.json");
    for sub in ["a", "b"] {
        let d = dir.join(sub);
        fs::create_dir_all(&d).unwrap();
        let out = run_in(&d, &["simulate", "--config", cfg.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    }
    for artifact in [
        "predetermined_trace.csv",
        "predetermined_report.json",
        "predetermined_trace.svg",
    ] {
        let a = fs::read(dir.join("a").join(artifact)).unwrap();
        let b = fs::read(dir.join("b").join(artifact)).unwrap();
        assert_eq!(a, b, "{artifact} differs between identical runs");
    }

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("a/predetermined_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["echo"]["found"], serde_json::json!(true));
    let peak = report["echo"]["peak_time"].as_f64().unwrap();
    assert!((11.0..11.6).contains(&peak), "echo peak at {peak}");
    let eta = report["echo"]["efficiency"].as_f64().unwrap();
    assert!((0.010..0.025).contains(&eta), "efficiency {eta}");
    assert!(report["derived"]["finesse"].as_f64().unwrap() > 4.0);

    let csv = fs::read_to_string(dir.join("a/predetermined_trace.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "# schema=nfcomb-trace/1");
    assert!(lines.next().unwrap().starts_with("# config={"));
    assert_eq!(
        lines.next().unwrap(),
        "tau_us,input_intensity,output_intensity,output_phase_rad"
    );
    assert!(csv.lines().count() > 100);

    let svg = fs::read_to_string(dir.join("a/predetermined_trace.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("<desc>"), "config description missing from figure");
}

#[test]
fn unknown_config_key_is_a_usage_error_with_location() {
    let dir = workdir("badkey");
    fs::write(
        dir.join("bad.json"),
        r#"{"isotope": "181Ta", "field_mt": 23.0, "thickness_um": 2.6, "filed_mt": 1}"#,
    )
    .unwrap();
    let out = run_in(&dir, &["simulate", "--config", "bad.json"]);
    assert_eq!(code(&out), 1);
    let err = stderr(&out);
    assert!(err.contains("unknown field `filed_mt`"), "stderr: {err}");
    assert!(err.contains("line 1"), "stderr: {err}");
}

#[test]
fn zero_field_run_reports_absorption_only() {
    let dir = workdir("zerofield");
    fs::write(
        dir.join("cfg.json"),
        r#"{"isotope": "181Ta", "field_mt": 0.0, "thickness_um": 2.6,
            "input": {"fwhm_us": 1.41}}"#,
    )
    .unwrap();
    let out = run_in(
        &dir,
        &["simulate", "--config", "cfg.json", "--csv", "trace.csv", "--report", "report.json"],
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("no echo"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert!(report["echo"].is_null());
    let trans = report["derived"]["energy_transmission"].as_f64().unwrap();
    assert!((0.0..1.0).contains(&trans));
    assert!(dir.join("trace.csv").exists());
}

#[test]
fn oracle_gates_only_in_strict_mode() {
    let dir = workdir("oracle");
    let cfg = repo_config("oracle_uniform.json");
    let cfg = cfg.to_str().unwrap();

    let out = run_in(&dir, &["oracle", "--config", cfg, "--strict", "--report", "oracle.json"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("oracle.json")).unwrap()).unwrap();
    assert!(report["engine_vs_filter_rel_l2"].as_f64().unwrap() < 1e-3);
    assert_eq!(report["uniform_comb"], serde_json::json!(true));

    // same comparison, impossibly tight gate → tolerance exit code
    let out = run_in(&dir, &["oracle", "--config", cfg, "--strict", "--tol-analytic", "1e-5"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("tolerance failure"));

    // non-strict never gates
    let out = run_in(&dir, &["oracle", "--config", cfg, "--tol-analytic", "1e-5"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn oracle_rejects_switched_configs() {
    let dir = workdir("oracle_switch");
    fs::write(
        dir.join("cfg.json"),
        r#"{"isotope": "181Ta", "field_mt": 23.0, "thickness_um": 2.6,
            "protocol": "ondemand-znfc", "switch": {"fraction": 0.5}}"#,
    )
    .unwrap();
    let out = run_in(&dir, &["oracle", "--config", "cfg.json"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("static"));
}

#[test]
fn single_point_sweep_writes_one_row() {
    let dir = workdir("sweep");
    fs::write(
        dir.join("plan.json"),
        r#"{"comb": {"isotope": {"name": "181Ta"}}, "protocol": "predetermined-znfc",
            "loss": "realistic", "xi_values": [15.0], "t0_values": [11.5], "threads": 1}"#,
    )
    .unwrap();
    let out = run_in(
        &dir,
        &["sweep", "--plan", "plan.json", "--csv", "s.csv", "--json", "s.json", "--svg", "s.svg"],
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("best efficiency"));

    let csv = fs::read_to_string(dir.join("s.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 4, "preamble(2) + header + one data row: {csv}");
    assert!(rows[3].starts_with("15,11.5,"));

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("s.json")).unwrap()).unwrap();
    assert_eq!(json["points"].as_array().unwrap().len(), 1);
    assert!(fs::read_to_string(dir.join("s.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn user_isotope_table_merges_over_builtins() {
    let dir = workdir("usertable");
    fs::write(
        dir.join("extra.json"),
        r#"{
  "schema": "nfcomb-isotope-table/1",
  "isotopes": [
    {
      "name": "181Ta",
      "transition_energy_kev": 6.237,
      "multipole_rank": 1,
      "lifetime_us": 17.46,
      "spin_ground": 3.5,
      "spin_excited": 4.5,
      "g_ground": 0.6772857142857143,
      "g_excited": 1.1733333333333333,
      "resonant_cross_section_cm2": 1.1e-18,
      "cross_section_ratio": 12.3,
      "lamb_mossbauer": 0.96,
      "number_density_per_cm3": 5.542e22,
      "internal_conversion": 70.5
    },
    {
      "name": "57FeDemo",
      "transition_energy_kev": 14.4,
      "multipole_rank": 1,
      "lifetime_us": 0.141,
      "spin_ground": 0.5,
      "spin_excited": 1.5,
      "g_ground": 0.1806,
      "g_excited": -0.1033
    }
  ]
}"#,
    )
    .unwrap();

    // override visible: doubled lifetime
    let out = run_in(&dir, &["--isotopes", "extra.json", "isotope", "181Ta"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("17.4600 µs"), "stdout: {}", stdout(&out));

    // new entry visible, incomplete fields flagged
    let out = run_in(&dir, &["--isotopes", "extra.json", "isotope", "57FeDemo"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("comb teeth: 2"));
    assert!(text.contains("missing:"));

    // without the table the new entry is unknown
    let out = run_in(&dir, &["isotope", "57FeDemo"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn simulate_flags_override_config_values() {
    let dir = workdir("overrides");
    let cfg = repo_config("on_demand_half_period.json");
    let out = run_in(
        &dir,
        &[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--fwhm-us",
            "2.0",
            "--switch-time-us",
            "3.8",
            "--report",
            "r.json",
        ],
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("r.json")).unwrap()).unwrap();
    assert_eq!(report["derived"]["input_fwhm_us"].as_f64().unwrap(), 2.0);
    assert_eq!(report["derived"]["switch_time_us"].as_f64().unwrap(), 3.8);
    // echo rephases at twice the switch time
    let peak = report["echo"]["peak_time"].as_f64().unwrap();
    assert!((peak - 7.6).abs() < 0.75, "peak {peak} should sit near 7.6 µs");
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    let dir = workdir("usage");
    let out = run_in(&dir, &["frobnicate"]);
    assert_eq!(code(&out), 1);

    let out = run_in(&dir, &["simulate"]);
    assert_eq!(code(&out), 1, "missing --config is a usage error");

    let out = run_in(&dir, &["--help"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("simulate"));

    let out = run_in(&dir, &["simulate", "--config", "does_not_exist.json"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("does_not_exist.json"));
}
