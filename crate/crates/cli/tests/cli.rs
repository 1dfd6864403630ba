use std::io::Write;
use std::path::PathBuf;
use std::process::Command;

use morrey_embed::estimators::{estimate_with, EstimateOptions};
use morrey_embed::numerics::QuadratureConfig;
use morrey_embed::oracle::OracleConfig;
use morrey_embed::spaces::RadialProblem;
use morrey_embed_cli::{run_args, verify_with, ProblemConfig};
use serde_json::Value;
use tempfile::TempDir;

const MAIN01: &str = r#"{ "p1": 2, "p2": 1, "th1": "2", "th2": "1",
  "omega1": "t^-0.25", "omega2": "exp(-t)" }"#;

fn config(dir: &TempDir, body: &str) -> PathBuf {
    let path = dir.path().join("problem.json");
    std::fs::File::create(&path).unwrap().write_all(body.as_bytes()).unwrap();
    path
}

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("morrey-embed").chain(args.iter().copied());
    let code = run_args(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn closed_form() -> f64 {
    (std::f64::consts::PI / 2.0).powf(0.25)
}

#[test]
fn estimate_main01_text_and_json() {
    let dir = TempDir::new().unwrap();
    let path = config(&dir, MAIN01);
    let p = path.to_str().unwrap();

    let (code, out, _) = run(&["estimate", "--config", p]);
    assert_eq!(code, 0);
    assert!(out.contains("regime: Main01"), "{out}");

    let (code, out, _) = run(&["estimate", "--config", p, "--json"]);
    assert_eq!(code, 0);
    let doc: Value = serde_json::from_str(&out).unwrap();
    for key in ["regime", "value", "terms", "checks", "hypotheses_verified", "warnings", "explanation", "oracle"] {
        assert!(doc.get(key).is_some(), "missing {key} in {out}");
    }
    let value = doc["value"].as_f64().unwrap();
    assert!((value / closed_form() - 1.0).abs() < 1e-6, "{value}");
    assert!(doc["oracle"]["lower_bound"].is_null());
}

#[test]
fn estimate_with_oracle_budget_reports_a_lower_bound() {
    let dir = TempDir::new().unwrap();
    let path = config(&dir, MAIN01);
    let (code, out, _) = run(&["estimate", "--config", path.to_str().unwrap(), "--json", "--oracle-budget", "0.1", "--seed", "7"]);
    assert_eq!(code, 0);
    let doc: Value = serde_json::from_str(&out).unwrap();
    let lb = doc["oracle"]["lower_bound"].as_f64().unwrap();
    assert!(lb > 0.0 && lb <= 8.0 * doc["value"].as_f64().unwrap(), "{lb}");
    assert_eq!(doc["oracle"]["budget"]["seed"], 7);
}

#[test]
fn not_embedded_exits_two() {
    let dir = TempDir::new().unwrap();
    let path = config(&dir, &MAIN01.replace(r#""p2": 1"#, r#""p2": 3"#));
    let (code, out, _) = run(&["estimate", "--config", path.to_str().unwrap(), "--json"]);
    assert_eq!(code, 2);
    let doc: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["regime"], "NotEmbedded");
    assert_eq!(doc["value"], "inf");
}

#[test]
fn malformed_input_exits_one() {
    let dir = TempDir::new().unwrap();
    let bad_expr = config(&dir, &MAIN01.replace("exp(-t)", "exp(-t"));
    let (code, _, err) = run(&["estimate", "--config", bad_expr.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("omega2"), "{err}");

    let bad_exponent = config(&dir, &MAIN01.replace(r#""th1": "2""#, r#""th1": "0""#));
    assert_eq!(run(&["classify", "--config", bad_exponent.to_str().unwrap()]).0, 1);

    let unknown = config(&dir, &MAIN01.replace("\"p1\"", "\"q1\""));
    assert_eq!(run(&["classify", "--config", unknown.to_str().unwrap()]).0, 1);

    assert_eq!(run(&["estimate", "--config", "/nonexistent/problem.json"]).0, 1);
    assert_eq!(run(&["frobnicate"]).0, 1);
}

#[test]
fn json_keys_are_stable_across_regimes() {
    let dir = TempDir::new().unwrap();
    let cases = [
        (MAIN01.to_string(), "Main01", 0),
        (MAIN01.replace(r#""p2": 1"#, r#""p2": 3"#), "NotEmbedded", 2),
        (MAIN01.replace(r#""th2": "1""#, r#""th2": "0.5""#), "OpenCase", 2),
        (MAIN01.replace(r#""th1": "2""#, r#""th1": "inf""#), "Unsupported", 2),
    ];
    for (body, tag, exit) in cases {
        let path = config(&dir, &body);
        let (code, out, err) = run(&["estimate", "--config", path.to_str().unwrap(), "--json"]);
        assert_eq!(code, exit, "{tag}: {err}");
        let doc: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(doc["regime"], tag);
        for key in ["regime", "value", "terms", "checks", "hypotheses_verified", "warnings", "explanation", "oracle"] {
            assert!(doc.get(key).is_some(), "{tag}: missing {key}");
        }
        if exit == 2 {
            assert!(doc["explanation"].is_string(), "{tag}");
        }
    }
}

#[test]
fn verify_open_case_exits_two_with_explanation() {
    let dir = TempDir::new().unwrap();
    let path = config(&dir, &MAIN01.replace(r#""th2": "1""#, r#""th2": "0.5""#));
    let (code, out, _) = run(&["verify", "--config", path.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(out.contains("OpenCase") && out.contains("note:"), "{out}");
}

#[test]
fn classify_prints_the_tag() {
    let dir = TempDir::new().unwrap();
    let path = config(&dir, MAIN01);
    let (code, out, _) = run(&["classify", "--config", path.to_str().unwrap()]);
    assert_eq!((code, out.trim()), (0, "Main01"));
    let (_, out, _) = run(&["classify", "--config", path.to_str().unwrap(), "--json"]);
    let doc: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["estimated"], true);
}

#[test]
fn verify_passes_on_the_true_estimator() {
    let dir = TempDir::new().unwrap();
    let path = config(&dir, MAIN01);
    let (code, out, _) = run(&["verify", "--config", path.to_str().unwrap(), "--oracle-budget", "0.2", "--json"]);
    assert_eq!(code, 0, "{out}");
    let doc: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["status"], "PASS");
}

#[test]
fn verify_fails_against_an_underestimating_estimator() {
    let dir = TempDir::new().unwrap();
    let prob = ProblemConfig::load(&config(&dir, MAIN01)).unwrap().problem().unwrap();
    let cfg = QuadratureConfig::default();
    let oracle = OracleConfig::default().scaled_budget(0.2);
    let shrunk = |p: &RadialProblem, c: &QuadratureConfig, o: &EstimateOptions| {
        estimate_with(p, c, o).map(|mut r| {
            r.value = r.value.map(|v| v * 1e-3);
            r
        })
    };
    let report = verify_with(&prob, &cfg, &EstimateOptions::default(), &oracle, 8.0, &shrunk).unwrap();
    assert_eq!(report.passed, Some(false));
    assert!(report.ratio.unwrap() > 8.0);

    let honest = verify_with(&prob, &cfg, &EstimateOptions::default(), &oracle, 8.0, &estimate_with).unwrap();
    assert_eq!(honest.passed, Some(true));
}

fn csv_rows(out: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(out.as_bytes());
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        ["axis", "value", "regime", "estimate", "oracle_lower_bound", "error"]
    );
    r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn sweep_in_omega2_is_linear() {
    let dir = TempDir::new().unwrap();
    let path = config(&dir, MAIN01);
    let args = ["sweep", "--config", path.to_str().unwrap(), "--axis", "omega2", "--from", "0.5", "--to", "4", "--steps", "7"];
    let (code, out, _) = run(&args);
    assert_eq!(code, 0);
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 8);
    for row in &rows {
        let lambda: f64 = row[1].parse().unwrap();
        let est: f64 = row[3].parse().unwrap();
        assert_eq!(row[0], "omega2");
        assert!((est / (lambda * closed_form()) - 1.0).abs() < 1e-6, "{row:?}");
    }
}

#[test]
fn sweep_across_p2_leaves_the_embedding_range() {
    let dir = TempDir::new().unwrap();
    let path = config(&dir, MAIN01);
    let args = ["sweep", "--config", path.to_str().unwrap(), "--axis", "p2", "--from", "1", "--to", "4", "--steps", "3"];
    let (code, out, _) = run(&args);
    assert_eq!(code, 0);
    let rows = csv_rows(&out);
    let regimes: Vec<&str> = rows.iter().map(|r| r[2].as_str()).collect();
    assert_eq!(regimes[0], "Main01");
    assert_eq!(regimes[2..], ["NotEmbedded", "NotEmbedded"]);
    assert_eq!(rows[2][3], "inf");
}

#[test]
fn sweep_across_th2_changes_regime_once() {
    let dir = TempDir::new().unwrap();
    let path = config(&dir, MAIN01);
    let args = ["sweep", "--config", path.to_str().unwrap(), "--axis", "th2", "--from", "1.5", "--to", "4", "--steps", "5"];
    let (code, out, _) = run(&args);
    assert_eq!(code, 0);
    let regimes: Vec<String> = csv_rows(&out).into_iter().map(|r| r[2].clone()).collect();
    assert_eq!(regimes.len(), 6);
    let changes = regimes.windows(2).filter(|w| w[0] != w[1]).count();
    assert_eq!(changes, 1, "{regimes:?}");
    assert_eq!((regimes[0].as_str(), regimes[5].as_str()), ("Main02_ii", "Main02_i"));
}

#[test]
fn sweep_with_zero_steps_has_one_row() {
    let dir = TempDir::new().unwrap();
    let path = config(&dir, MAIN01);
    let args = ["sweep", "--config", path.to_str().unwrap(), "--axis", "v2", "--from", "2", "--to", "9", "--steps", "0"];
    let (_, out, _) = run(&args);
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][1], "2");
}

#[test]
fn sweep_reports_bad_points_in_the_error_column() {
    let dir = TempDir::new().unwrap();
    let path = config(&dir, MAIN01);
    let args = ["sweep", "--config", path.to_str().unwrap(), "--axis", "omega1", "--from", "0", "--to", "1", "--steps", "1"];
    let (code, out, _) = run(&args);
    assert_eq!(code, 0);
    let rows = csv_rows(&out);
    assert!(!rows[0][5].is_empty());
    assert!(rows[1][5].is_empty());
}

#[test]
fn binary_exit_codes() {
    let dir = TempDir::new().unwrap();
    let good = config(&dir, MAIN01);
    let bin = env!("CARGO_BIN_EXE_morrey-embed");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap();

    let out = status(&["estimate", "--config", good.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("Main01"));

    let help = status(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("estimate"));

    let missing = status(&["estimate", "--config", "/nonexistent.json"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("error:"));

    let other = TempDir::new().unwrap();
    let divergent = config(&other, &MAIN01.replace(r#""p2": 1"#, r#""p2": 3"#));
    assert_eq!(status(&["estimate", "--config", divergent.to_str().unwrap()]).status.code(), Some(2));
}
