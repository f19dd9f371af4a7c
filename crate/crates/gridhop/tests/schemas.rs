//! Every JSON document the binary reads or emits validates against the
//! versioned schemas shipped under `schemas/`.

use std::path::{Path, PathBuf};
use std::process::Command;

use chrono::{Duration, TimeZone, Utc};
use jsonschema::Validator;

fn schema(name: &str) -> Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(name);
    let doc: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&path).unwrap_or_else(|e| panic!("{name}: {e}")))
            .unwrap_or_else(|e| panic!("{name} is not JSON: {e}"));
    jsonschema::validator_for(&doc).unwrap_or_else(|e| panic!("{name} is not a valid schema: {e}"))
}

fn check(validator: &Validator, doc: &serde_json::Value, what: &str) {
    let errors: Vec<String> = validator
        .iter_errors(doc)
        .map(|e| format!("  {}: {e}", e.instance_path()))
        .collect();
    assert!(
        errors.is_empty(),
        "{what} does not validate:\n{}",
        errors.join("\n")
    );
}

fn run_ok(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_gridhop"))
        .args(args)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

fn json(bytes: &[u8]) -> serde_json::Value {
    serde_json::from_slice(bytes).expect("valid JSON")
}

fn json_file(path: &Path) -> serde_json::Value {
    json(&std::fs::read(path).unwrap())
}

/// Two days of three-hour steps at two nodes, plus a config matching
/// that cadence with a small wear budget.
struct Fixture {
    _dir: tempfile::TempDir,
    prices: PathBuf,
    config: PathBuf,
    root: PathBuf,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let prices = dir.path().join("prices.csv");
    let config = dir.path().join("config.json");

    let mut csv = String::from("timestamp,node_id,lmp_usd_per_mwh\n");
    let start = Utc.with_ymd_and_hms(2025, 6, 1, 0, 0, 0).unwrap();
    for step in 0..16 {
        let ts = (start + Duration::hours(3 * step)).format("%Y-%m-%dT%H:%M:%SZ");
        let a = 10.0 + (step % 8) as f64;
        let b = 90.0 - 2.0 * (step % 8) as f64;
        csv.push_str(&format!("{ts},A,{a}\n{ts},B,{b}\n"));
    }
    std::fs::write(&prices, csv).unwrap();

    std::fs::write(
        &config,
        r#"{
  "system": {
    "horizon": { "step_hours": 3.0, "steps_per_day": 8 },
    "transport": {
      "node_a_id": "A",
      "node_b_id": "B",
      "travel_steps": 1,
      "travel_cost_per_step_usd": 4.0
    },
    "degradation": {
      "marginal_cost_usd_per_mwh": 25.0,
      "calendar_throughput_mwh_per_day": 1.5,
      "lifetime_throughput_budget_mwh": 60.0,
      "annual_discount_rate": 0.07
    }
  }
}
"#,
    )
    .unwrap();

    let root = dir.path().to_path_buf();
    Fixture {
        _dir: dir,
        prices,
        config,
        root,
    }
}

#[test]
fn input_documents_validate() {
    let f = fixture();
    let config_schema = schema("run_config.v1.schema.json");
    check(&config_schema, &json_file(&f.config), "fixture config");
    check(&config_schema, &serde_json::json!({}), "empty config");
    check(
        &config_schema,
        &serde_json::json!({ "solver": { "node_limit": 500 } }),
        "partial config",
    );

    let boundary_schema = schema("boundary_state.v1.schema.json");
    check(
        &boundary_schema,
        &serde_json::json!({
            "initial_energy_mwh": 1.5,
            "initial_location": { "kind": "at_node_b" },
            "travel_history": [false]
        }),
        "parked boundary",
    );
    check(
        &boundary_schema,
        &serde_json::json!({
            "initial_energy_mwh": 0.0,
            "initial_location": { "kind": "in_transit", "remaining_steps": 1, "destination": "a" },
            "travel_history": [false, true]
        }),
        "mid-journey boundary",
    );

    // A typo the parser rejects must not validate either.
    assert!(config_schema
        .validate(&serde_json::json!({ "sistem": {} }))
        .is_err());
}

#[test]
fn analyze_report_validates() {
    let f = fixture();
    let validator = schema("analyze_report.v1.schema.json");

    let with_out = f.root.join("analysis.json");
    run_ok(&[
        "analyze",
        "--prices",
        f.prices.to_str().unwrap(),
        "--config",
        f.config.to_str().unwrap(),
        "--out",
        with_out.to_str().unwrap(),
    ]);
    check(&validator, &json_file(&with_out), "analyze report");
}

#[test]
fn optimize_day_report_validates() {
    let f = fixture();
    let validator = schema("optimize_day_report.v1.schema.json");

    let stdout = run_ok(&[
        "optimize-day",
        "--prices",
        f.prices.to_str().unwrap(),
        "--config",
        f.config.to_str().unwrap(),
        "--date",
        "2025-06-01",
    ]);
    check(&validator, &json(&stdout), "optimize-day report");
}

#[test]
fn simulate_and_lifetime_reports_validate() {
    let f = fixture();
    let lifetime_path = f.root.join("lifetime.json");

    let stdout = run_ok(&[
        "simulate",
        "--prices",
        f.prices.to_str().unwrap(),
        "--config",
        f.config.to_str().unwrap(),
        "--start",
        "2025-06-01",
        "--days",
        "2",
        "--lifetime-out",
        lifetime_path.to_str().unwrap(),
    ]);
    check(
        &schema("simulate_report.v1.schema.json"),
        &json(&stdout),
        "simulate report",
    );
    check(
        &schema("lifetime_report.v1.schema.json"),
        &json_file(&lifetime_path),
        "lifetime report",
    );
}

#[test]
fn compare_report_validates() {
    let f = fixture();
    let stdout = run_ok(&[
        "compare",
        "--prices",
        f.prices.to_str().unwrap(),
        "--config",
        f.config.to_str().unwrap(),
        "--start",
        "2025-06-01",
        "--days",
        "2",
    ]);
    check(
        &schema("compare_report.v1.schema.json"),
        &json(&stdout),
        "compare report",
    );
}

#[test]
fn calibrate_report_validates() {
    let f = fixture();
    let stdout = run_ok(&[
        "calibrate",
        "--prices",
        f.prices.to_str().unwrap(),
        "--config",
        f.config.to_str().unwrap(),
        "--start",
        "2025-06-01",
        "--days",
        "1",
        "--candidates",
        "20,30",
    ]);
    check(
        &schema("calibrate_report.v1.schema.json"),
        &json(&stdout),
        "calibrate report",
    );
}
