use std::path::Path;
use std::process::{Command, Output};

use regex::Regex;
use serde_json::Value;

fn richowner(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_richowner"))
        .args(args)
        .current_dir(dir)
        .env_remove("RICHOWNER_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Checks `value` against the subset of JSON Schema used by the report schema.
fn validate(value: &Value, schema: &Value, root: &Value, path: &str) -> Vec<String> {
    let mut errors = Vec::new();
    if let Some(r) = schema.get("$ref").and_then(Value::as_str) {
        let name = r.strip_prefix("#/$defs/").expect("local refs only");
        return validate(value, &root["$defs"][name], root, path);
    }
    if let Some(options) = schema.get("oneOf").and_then(Value::as_array) {
        let matching = options.iter().filter(|o| validate(value, o, root, path).is_empty()).count();
        if matching != 1 {
            errors.push(format!("{path}: matches {matching} oneOf branches"));
        }
        return errors;
    }
    if let Some(t) = schema.get("type").and_then(Value::as_str) {
        let ok = match t {
            "object" => value.is_object(),
            "array" => value.is_array(),
            "string" => value.is_string(),
            "integer" => value.is_u64() || value.is_i64(),
            "number" => value.is_number(),
            "boolean" => value.is_boolean(),
            "null" => value.is_null(),
            other => panic!("unsupported type {other}"),
        };
        if !ok {
            errors.push(format!("{path}: expected {t}, got {value}"));
            return errors;
        }
    }
    if let Some(options) = schema.get("enum").and_then(Value::as_array) {
        if !options.contains(value) {
            errors.push(format!("{path}: {value} not in {options:?}"));
        }
    }
    if let Some(p) = schema.get("pattern").and_then(Value::as_str) {
        if !Regex::new(p).unwrap().is_match(value.as_str().unwrap()) {
            errors.push(format!("{path}: {value} does not match {p}"));
        }
    }
    if let (Some(min), Some(v)) = (schema.get("minimum").and_then(Value::as_f64), value.as_f64()) {
        if v < min {
            errors.push(format!("{path}: {v} < {min}"));
        }
    }
    if let (Some(max), Some(v)) = (schema.get("maximum").and_then(Value::as_f64), value.as_f64()) {
        if v > max {
            errors.push(format!("{path}: {v} > {max}"));
        }
    }
    if let Some(obj) = value.as_object() {
        let props = schema.get("properties").and_then(Value::as_object);
        for key in schema.get("required").and_then(Value::as_array).into_iter().flatten() {
            if !obj.contains_key(key.as_str().unwrap()) {
                errors.push(format!("{path}: missing {key}"));
            }
        }
        for (key, v) in obj {
            match props.and_then(|p| p.get(key)) {
                Some(s) => errors.extend(validate(v, s, root, &format!("{path}.{key}"))),
                None if schema.get("additionalProperties") == Some(&Value::Bool(false)) => {
                    errors.push(format!("{path}: unexpected key {key}"))
                }
                None => {}
            }
        }
    }
    if let (Some(items), Some(arr)) = (schema.get("items"), value.as_array()) {
        for (i, v) in arr.iter().enumerate() {
            errors.extend(validate(v, items, root, &format!("{path}[{i}]")));
        }
    }
    errors
}

fn schema() -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/report.schema.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn validator_rejects_broken_reports() {
    let schema = schema();
    let bad = serde_json::json!({ "tool_version": 1, "extra": true });
    let errors = validate(&bad, &schema, &schema, "$");
    assert!(errors.iter().any(|e| e.contains("missing")));
    assert!(errors.iter().any(|e| e.contains("unexpected key")));
    assert!(errors.iter().any(|e| e.contains("expected string")));
}

#[test]
fn experiment_reports_follow_the_schema_and_convert() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    std::fs::write(&cfg, "# small run\nscenario=collinear:q=2\ntrials=6\n").unwrap();
    for decoder in ["membership", "known-profile"] {
        let out = richowner(
            &[
                "experiment",
                "--config",
                "exp.cfg",
                "--set",
                &format!("decoder={decoder}"),
                "--json",
                "r.json",
                "--csv",
                "r.csv",
            ],
            dir.path(),
        );
        assert!(stdout(&out).contains("trials=6"));
        let text = std::fs::read_to_string(dir.path().join("r.json")).unwrap();
        let report: Value = serde_json::from_str(&text).unwrap();
        let schema = schema();
        let errors = validate(&report, &schema, &schema, "$");
        assert!(errors.is_empty(), "{errors:#?}");
        assert_eq!(report["config"]["decoder"], decoder);

        let csv = stdout(&richowner(&["report", "--input", "r.json", "--format", "csv"], dir.path()));
        assert_eq!(csv, std::fs::read_to_string(dir.path().join("r.csv")).unwrap());
        assert_eq!(csv.lines().count(), 7);
        let json = stdout(&richowner(&["report", "--input", "r.json", "--format", "json"], dir.path()));
        assert_eq!(json, text);
    }
}

#[test]
fn seed_comes_from_the_environment_unless_overridden() {
    let dir = tempfile::tempdir().unwrap();
    let run = |extra: &[&str]| -> Value {
        let mut args = vec!["experiment", "--set", "trials=1", "--set", "scenario=collinear:q=2", "--json", "s.json"];
        args.extend_from_slice(extra);
        let out = Command::new(env!("CARGO_BIN_EXE_richowner"))
            .args(&args)
            .current_dir(dir.path())
            .env("RICHOWNER_SEED", "42")
            .output()
            .unwrap();
        stdout(&out);
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("s.json")).unwrap()).unwrap()
    };
    assert_eq!(run(&[])["config"]["seed"], 42);
    assert_eq!(run(&["--set", "seed=7"])["config"]["seed"], 7);
}

#[test]
fn unknown_keys_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = richowner(&["experiment", "--set", "bogus=1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
}

#[test]
fn encode_then_decode_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let built = stdout(&richowner(
        &["build-graph", "--n", "4", "--k", "3", "--seed", "7", "--out", "g.bin"],
        dir.path(),
    ));
    assert!(built.contains("ell="));
    // (0,0), (1,1), (2,2) on the diagonal of GF(4)^2
    let mut codewords = Vec::new();
    for (sender, x, seed) in [("A", "0", "1"), ("B", "5", "2"), ("C", "a", "3")] {
        let out = stdout(&richowner(
            &["encode", "--graph", "g.bin", "--sender", sender, "--x", x, "--seed", seed],
            dir.path(),
        ));
        codewords.push(serde_json::from_str::<Value>(&out).unwrap());
    }
    std::fs::write(dir.path().join("cw.json"), serde_json::to_string(&codewords).unwrap()).unwrap();
    for extra in [
        vec!["--decoder", "membership"],
        vec!["--decoder", "known-profile", "--rates", "3,3,3"],
    ] {
        let mut args = vec![
            "decode",
            "--graphs",
            "g.bin,g.bin,g.bin",
            "--codewords",
            "cw.json",
            "--scenario",
            "collinear:q=2",
        ];
        args.extend(extra);
        let result: Value = serde_json::from_str(&stdout(&richowner(&args, dir.path()))).unwrap();
        assert_eq!(result["status"], "ok", "{result}");
        assert_eq!(result["triple_hex"], serde_json::json!(["0", "5", "a"]));
    }
}

#[test]
fn audits_and_profiles_report_exact_values() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&richowner(
        &["build-graph", "--n", "4", "--k", "2", "--plain", "--out", "e.bin"],
        dir.path(),
    ));
    let report: Value = serde_json::from_str(&stdout(&richowner(&["verify-graph", "--graph", "e.bin"], dir.path()))).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["epsilon"], "1/8");

    let profile: Value = serde_json::from_str(&stdout(&richowner(
        &["profile", "--scenario", "collinear:q=2"],
        dir.path(),
    )))
    .unwrap();
    assert_eq!(profile["members"], 480);
    assert_eq!(profile["projections"], serde_json::json!([16, 16, 16, 240, 240, 240, 480]));

    // 0x10 - 0x01 = 15 = 3 * 5 and 0x10 - 0x02 = 14 = 2 * 7: four primes collide.
    let audit: Value = serde_json::from_str(&stdout(&richowner(
        &["hash-audit", "--n", "8", "--epsilon", "1/10", "--u", "10", "--distractors", "01,02"],
        dir.path(),
    )))
    .unwrap();
    let t = audit["t"].as_u64().unwrap();
    let (mut a, mut b) = (t - 4, t);
    while b != 0 {
        (a, b) = (b, a % b);
    }
    assert_eq!(audit["isolation_probability"], format!("{}/{}", (t - 4) / a, t / a).as_str());
}
