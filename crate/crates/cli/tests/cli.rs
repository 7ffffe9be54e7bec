use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn modegate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modegate"))
        .args(args)
        .env_remove("MODEGATE_CONFIG")
        .output()
        .expect("binary runs")
}

fn schema_path(command: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("schemas/{command}.schema.json"))
}

fn load_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_valid(schema_file: &Path, doc: &Value) {
    let schema = load_json(schema_file);
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| format!("{e} at {}", e.instance_path())).collect();
    assert!(errors.is_empty(), "{}: {errors:#?}", schema_file.display());
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn outputs_validate_against_schemas() {
    let tmp = tempfile::tempdir().unwrap();
    let files = [
        ("hom", "hom_fit.json"),
        ("bell", "bell.json"),
        ("chsh", "chsh.json"),
        ("qpt", "qpt.json"),
        ("truth-table", "truth_table.json"),
    ];
    for exact in [true, false] {
        let dir = tmp.path().join(if exact { "exact" } else { "sampled" });
        for (cmd, file) in files {
            let mut args = vec![cmd, "--trials", "3", "--seed", "5", "--output", dir.to_str().unwrap()];
            if exact {
                args.push("--exact");
            }
            let out = modegate(&args);
            assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
            let doc = load_json(&dir.join(file));
            assert_eq!(doc["schema_version"], 1);
            assert_eq!(doc["command"], cmd);
            assert_eq!(doc["seed"], 5);
            assert_valid(&schema_path(cmd), &doc);
            assert_valid(&schema_path("config"), &doc["config"]);
        }
    }
}

#[test]
fn shipped_config_validates_and_loads() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/paper_regime.json");
    assert_valid(&schema_path("config"), &load_json(&path));
    let out = modegate(&["truth-table", "--exact", "--config", path.to_str().unwrap()]);
    assert!(out.status.success());
}

#[test]
fn exact_mode_reports_zero_errors() {
    let out = modegate(&["bell", "--exact", "--input", "+0"]);
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    let row = &doc["result"]["results"][0];
    for key in ["fidelity", "linear_entropy", "tangle"] {
        assert_eq!(row[key]["std"], 0.0, "{key}");
    }
    assert_eq!(doc["exact"], true);
    assert_eq!(doc["config"]["exact"], true);
}

#[test]
fn sampled_mode_reports_errors() {
    let out = modegate(&["chsh", "--trials", "10", "--input=-1"]);
    assert!(out.status.success());
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    let row = &doc["result"]["results"][0];
    assert_eq!(row["input"], "-1");
    assert_eq!(row["target_state"], "psi-");
    assert!(row["s"]["std"].as_f64().unwrap() > 0.0);
    assert!(row["s"]["value"].as_f64().unwrap() > 2.0);
}

#[test]
fn hom_csv_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().to_str().unwrap();
    let out = modegate(&["hom", "--exact", "--points", "11", "--span", "2", "--output", dir]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(tmp.path().join("hom_scan.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "delay,counts,exact_probability");
    assert_eq!(lines.len(), 12);
    let middle: Vec<f64> = lines[6].split(',').map(|f| f.parse().unwrap()).collect();
    assert_eq!(middle[0], 0.0);
    assert!((middle[2] - 1.0 / 9.0).abs() < 1e-12);
    assert!((middle[1] - 1e4 / 9.0).abs() < 1e-8);
}

#[test]
fn truth_table_marks_blocked_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"noise": {"transmission": [1, 0, 1, 1]}}"#);
    let out = modegate(&["truth-table", "--exact", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "input,p00,p01,p10,p11");
    assert_eq!(lines[1], "00,1,0,0,0");
    assert_eq!(lines[3], "10,undefined,undefined,undefined,undefined");
    assert_eq!(lines[4], "11,undefined,undefined,undefined,undefined");
}

#[test]
fn blocked_control_te1_gives_no_entanglement() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"noise": {"transmission": [1, 0, 1, 1]}}"#);
    let out = modegate(&["bell", "--exact", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    for row in doc["result"]["results"].as_array().unwrap() {
        assert!(row["tangle"]["value"].as_f64().unwrap() < 1e-12);
    }
}

#[test]
fn configuration_errors_exit_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        r#"{"seeds": 1}"#,
        r#"{"noise": {"indistinguishability": 2.0}}"#,
        r#"{"noise": {"device": {"cross_ratio": -0.1}}}"#,
        r#"{"trials": 1}"#,
        "not json",
    ];
    for text in cases {
        let cfg = write_config(tmp.path(), text);
        let out = modegate(&["bell", "--config", cfg.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{text}");
    }
    assert_eq!(modegate(&["bell", "--config", "/nonexistent/cfg.json"]).status.code(), Some(2));
    assert_eq!(modegate(&["bell", "--input", "+2"]).status.code(), Some(2));
    assert_eq!(modegate(&["teleport"]).status.code(), Some(2));
    assert_eq!(modegate(&["hom", "--points", "3"]).status.code(), Some(2));
}

#[test]
fn runtime_failures_exit_with_1() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"noise": {"transmission": [1, 0, 1, 1]}}"#);
    let out = modegate(&["qpt", "--exact", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("never yields a coincidence"));
}

#[test]
fn environment_names_default_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"seed": 77, "shots": 2500}"#);
    let out = Command::new(env!("CARGO_BIN_EXE_modegate"))
        .args(["truth-table", "--exact", "--output", tmp.path().join("o").to_str().unwrap()])
        .env("MODEGATE_CONFIG", &cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc = load_json(&tmp.path().join("o/truth_table.json"));
    assert_eq!(doc["seed"], 77);
    assert_eq!(doc["config"]["shots"], 2500);

    let out = Command::new(env!("CARGO_BIN_EXE_modegate"))
        .args(["bell", "--exact", "--seed", "3", "--config", cfg.to_str().unwrap()])
        .env("MODEGATE_CONFIG", "/nonexistent.json")
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["seed"], 3);
}

#[test]
fn help_exits_cleanly() {
    let out = modegate(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for cmd in ["hom", "bell", "chsh", "qpt", "truth-table"] {
        assert!(text.contains(cmd));
    }
}
