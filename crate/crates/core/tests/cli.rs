use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_floquet"))
}

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn config(name: &str) -> PathBuf {
    repo().join("configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn schema(name: &str) -> jsonschema::Validator {
    let text = std::fs::read_to_string(repo().join("docs/schema").join(name)).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn assert_valid(v: &jsonschema::Validator, doc: &Value, what: &str) {
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{what}: {errors:#?}");
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("cfg.json");
    std::fs::write(&p, body).unwrap();
    p
}

const PERIODIC_CONFIGS: [&str; 6] =
    ["example1.json", "example2.json", "cosine.json", "forced.json", "lambda_half.json", "integer_rotation.json"];

#[test]
fn version_prints_schema_version() {
    let out = run(&["--version"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("schema 1.0.0"));
}

#[test]
fn shipped_configs_match_config_schema() {
    let v = schema("config.schema.json");
    for entry in std::fs::read_dir(repo().join("configs")).unwrap() {
        let path = entry.unwrap().path();
        let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_valid(&v, &doc, &path.display().to_string());
    }
}

#[test]
fn reports_match_report_schema() {
    let v = schema("report.schema.json");
    for name in PERIODIC_CONFIGS {
        let out = run(&["analyze", "--config", config(name).to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_valid(&v, &doc, name);
        assert_eq!(doc["schema_version"], "1.0.0");
    }
}

#[test]
fn example_one_report_values() {
    let out = run(&["analyze", "--config", config("example1.json").to_str().unwrap()]);
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    for m in doc["multipliers"].as_array().unwrap() {
        assert!((m[0].as_f64().unwrap() - 2.0).abs() < 1e-9 && m[1].as_f64().unwrap().abs() < 1e-12);
    }
    assert_eq!(doc["stability"]["verdict_corollary"], "Unstable");
    assert_eq!(doc["periodic_solution"]["exists"], false);
}

#[test]
fn forced_report_has_fixed_point() {
    let out = run(&["analyze", "--config", config("forced.json").to_str().unwrap()]);
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    let nh = &doc["nonhomogeneous"];
    assert_eq!(nh["status"], "solved");
    for z in nh["x0"].as_array().unwrap() {
        assert!((z[0].as_f64().unwrap() + 1.0).abs() < 1e-10);
    }
}

#[test]
fn nonperiodic_scale_exits_with_periodicity_code() {
    let cfg = config("nonperiodic.json");
    let out = run(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["pass"], false);
    assert_eq!(code(&run(&["analyze", "--config", cfg.to_str().unwrap()])), 2);
}

#[test]
fn verify_passes_on_periodic_configs() {
    for name in PERIODIC_CONFIGS {
        let out = run(&["verify", "--config", config(name).to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{name}");
    }
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        r#"{"timescale": {"kind": "real", "window": [0, 4]}, "shifts": {"kind": "additive", "t0": 0, "T": 1}, "system": {"n": 1, "A": [["0"]]}, "extra": 1}"#,
        r#"{"timescale": {"kind": "moon", "window": [0, 4]}, "shifts": {"kind": "additive", "t0": 0, "T": 1}, "system": {"n": 1, "A": [["0"]]}}"#,
        r#"{"timescale": {"kind": "real", "window": [0, 4]}, "shifts": {"kind": "additive", "t0": 0, "T": 1}, "system": {"n": 2, "A": [["0"]]}}"#,
        r#"{"timescale": {"kind": "real", "window": [0, 4]}, "shifts": {"kind": "additive", "t0": 0, "T": 1}, "system": {"n": 1, "A": [["sin(t"]]}}"#,
        r#"{"timescale": {"kind": "real", "window": [0, 4]}, "shifts": {"kind": "additive", "t0": 0, "T": 1}, "system": {"n": 1, "A": [["k*t"]]}}"#,
        "not json",
    ];
    for body in cases {
        let p = write_config(dir.path(), body);
        let out = run(&["analyze", "--config", p.to_str().unwrap()]);
        assert_eq!(code(&out), 1, "{body}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let missing = dir.path().join("absent.json");
    assert_eq!(code(&run(&["verify", "--config", missing.to_str().unwrap()])), 1);
}

#[test]
fn tolerance_overrides() {
    let cfg = config("example1.json");
    let cfg = cfg.to_str().unwrap();
    assert_eq!(code(&run(&["--tol", "bogus=1", "analyze", "--config", cfg])), 1);
    assert_eq!(code(&run(&["analyze", "--config", cfg, "--tol", "eigen=abc"])), 1);
    assert_eq!(code(&run(&["analyze", "--config", cfg, "--tol", "eigen=1e-6", "--tol", "resonance=1e-7"])), 0);
}

#[test]
fn non_regressive_system_exits_with_numeric_code() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(
        dir.path(),
        r#"{"timescale": {"kind": "integer", "window": [0, 20]}, "shifts": {"kind": "additive", "t0": 0, "T": 2}, "system": {"n": 1, "A": [["-1"]]}}"#,
    );
    let out = run(&["analyze", "--config", p.to_str().unwrap()]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn report_and_samples_files_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("cosine.json");
    let mut csvs = Vec::new();
    for i in 0..2 {
        let report = dir.path().join(format!("report{i}.json"));
        let samples = dir.path().join(format!("samples{i}.csv"));
        let out = run(&[
            "analyze",
            "--config",
            cfg.to_str().unwrap(),
            "--report",
            report.to_str().unwrap(),
            "--samples",
            samples.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
        assert!(out.stdout.is_empty());
        let doc: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
        assert_valid(&schema("report.schema.json"), &doc, "report file");
        csvs.push(std::fs::read(&samples).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);

    let mut reader = csv::Reader::from_reader(csvs[0].as_slice());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(&header[..4], ["t", "sigma", "mu", "theta"]);
    assert_eq!(header.last().unwrap(), "lambda_ratio");
    // Φ, e_R and L contribute 2·n² columns each; n = 2 and one eigenvalue cluster.
    assert_eq!(header.len(), 4 + 3 * 8 + 1 + 1);
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 40);
    let ts: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(ts.windows(2).all(|w| w[0] < w[1]));
    assert!(rows.iter().all(|r| r.iter().all(|x| x.parse::<f64>().map(f64::is_finite).unwrap_or(false))));
}
