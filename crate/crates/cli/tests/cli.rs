//! End-to-end tests of the `siggame` binary: exit codes, output formats,
//! config layering, and byte-identical reruns.

use std::process::{Command, Output};

fn siggame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_siggame"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn scheme_prints_the_packed_probability_with_twelve_digits() {
    let out = siggame(&["scheme", "--p", "0.35", "--q", "0.8"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("\"accept_prob\": 0.333333333333"), "{text}");
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed["variant"], "no_test");
    assert_eq!(parsed["cells"].as_array().unwrap().len(), 2);
}

#[test]
fn scheme_with_test_has_four_cells() {
    let out = siggame(&["scheme", "--p", "0.25", "--q", "0.9", "--delta", "0.7"]);
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(parsed["variant"], "with_test");
    assert_eq!(parsed["cells"].as_array().unwrap().len(), 4);
}

#[test]
fn validate_exits_two_naming_the_violated_assumption() {
    let out = siggame(&["validate", "--p", "0.5", "--q", "0.9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("negative-prior"), "{}", stderr(&out));
}

#[test]
fn validate_accepts_a_valid_point() {
    let out = siggame(&["validate", "--p", "0.35", "--q", "0.8", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(parsed["valid"], true);
}

#[test]
fn validate_flags_near_boundary_parameters() {
    let out = siggame(&[
        "validate",
        "--p",
        "0.35",
        "--q",
        "0.65",
        "--tolerance",
        "1e-9",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("near boundary"));
}

#[test]
fn unknown_flags_exit_two() {
    let out = siggame(&["scheme", "--p", "0.35", "--q", "0.8", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_of_range_parameter_exits_two() {
    let out = siggame(&["scheme", "--p", "1.5", "--q", "0.8"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("`p` out of range"));
}

#[test]
fn canonicalize_reflects_low_accuracy() {
    let out = siggame(&["metrics", "--p", "0.35", "--q", "0.2", "--canonicalize"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("canonicalized"));
    let plain = siggame(&["metrics", "--p", "0.35", "--q", "0.8"]);
    assert_eq!(stdout(&out), stdout(&plain));
}

#[test]
fn metrics_json_round_trips_through_schema() {
    let out = siggame(&[
        "metrics", "--p", "0.25", "--q", "0.9", "--delta", "0.7", "--strategic", "--format",
        "json",
    ]);
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let utility = parsed["school_utility"].as_f64().unwrap();
    assert!((utility - 0.535483870967742).abs() < 1e-12);
}

#[test]
fn figures_emits_the_documented_csv_schema() {
    let dir = std::env::temp_dir().join("siggame-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("fig.csv");
    let out = siggame(&[
        "figures",
        "--p",
        "0.35",
        "--delta",
        "0.65",
        "--grid",
        "801",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "q,U_r_notest,U_s_notest,ratio_notest,U_r_test,U_s_test,ratio_test,regime_10,regime_01"
    );
    assert_eq!(lines.count(), 801);
    // The intervention raises the ratio at high grade accuracy here: check
    // the grid row nearest q = 0.95.
    let row = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect::<Vec<f64>>())
        .min_by(|a, b| {
            (a[0] - 0.95).abs().total_cmp(&(b[0] - 0.95).abs())
        })
        .unwrap();
    assert!(row[6] > row[3], "{row:?}");
}

#[test]
fn unwritable_output_path_exits_two() {
    let out = siggame(&[
        "figures",
        "--p",
        "0.35",
        "--delta",
        "0.8",
        "--out",
        "/nonexistent-dir/fig.csv",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("cannot write"));
}

#[test]
fn sweep_requires_delta() {
    let out = siggame(&["sweep", "--p", "0.35"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = [
        "simulate", "--p", "0.35", "--q", "0.8", "--strategic", "--n-students", "50000",
        "--seed", "11",
    ];
    let first = siggame(&args);
    let second = siggame(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);

    let changed = siggame(&[
        "simulate", "--p", "0.35", "--q", "0.8", "--strategic", "--n-students", "50000",
        "--seed", "12",
    ]);
    assert_ne!(first.stdout, changed.stdout);
}

#[test]
fn simulate_json_uses_mean_stderr_fields() {
    let out = siggame(&[
        "simulate", "--p", "0.3", "--q", "0.8", "--n-students", "10000", "--seed", "5",
        "--format", "json",
    ]);
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    for metric in ["utility", "fpr", "fnr", "university_utility"] {
        assert!(parsed[metric]["mean"].is_number(), "{metric}");
        assert!(parsed[metric]["stderr"].is_number(), "{metric}");
    }
}

#[test]
fn verify_passes_on_defaults_and_fails_nothing() {
    let out = siggame(&["verify", "--p", "0.35", "--grid", "60"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("0 failed"));
}

#[test]
fn verify_runs_oracle_cross_checks() {
    let out = siggame(&[
        "verify",
        "--p",
        "0.3",
        "--grid",
        "40",
        "--resolution",
        "0.005",
        "--draws",
        "3",
        "--seed",
        "1",
        "--full-grid",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("oracle_matches_fractional_cell"));
    assert!(text.contains("full_grid_within_coarse_bound"));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = std::env::temp_dir().join("siggame-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("config.toml");
    std::fs::write(&path, "p = 0.35\nq = 0.8\nformat = \"json\"\n").unwrap();
    let out = siggame(&["scheme", "--config", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("0.333333333333"));

    // A flag overrides the config value.
    let out = siggame(&["scheme", "--config", path.to_str().unwrap(), "--q", "0.9"]);
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let packed = parsed["cells"][0]["accept_prob"].as_f64().unwrap();
    assert!((packed - 0.25 / 0.55).abs() < 1e-9);

    let missing = siggame(&["scheme", "--config", "/nonexistent.toml"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn relaxed_scheme_through_the_cli() {
    let out = siggame(&[
        "scheme", "--p", "0.3", "--q", "0.95", "--delta", "0.6", "--relaxed", "--format",
        "json",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let cells = parsed["cells"].as_array().unwrap();
    let low_high = cells
        .iter()
        .find(|c| c["g"] == 0 && c["s"] == 1)
        .unwrap()["accept_prob"]
        .as_f64()
        .unwrap();
    assert!((low_high - 0.6108949416342413).abs() < 1e-9);

    // Without --relaxed the decisive-score table recommends every
    // high-score student outright.
    let strict = siggame(&["scheme", "--p", "0.3", "--q", "0.95", "--delta", "0.6"]);
    assert!(strict.status.success());
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&strict)).unwrap();
    let cells = parsed["cells"].as_array().unwrap();
    let low_high = cells
        .iter()
        .find(|c| c["g"] == 0 && c["s"] == 1)
        .unwrap()["accept_prob"]
        .as_f64()
        .unwrap();
    assert_eq!(low_high, 1.0);
}
