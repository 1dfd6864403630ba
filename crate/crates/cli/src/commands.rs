use std::io::Write;

use morrey_embed::estimators::{classify as regime_of, estimate_with, EstimateOptions, EstimateReport, RegimeTag};
use morrey_embed::numerics::QuadratureConfig;
use morrey_embed::oracle::{maximize_ratio, OracleConfig};
use morrey_embed::spaces::{ParamQuadruple, RadialProblem};
use morrey_embed::Error;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::ProblemConfig;
use crate::{Axis, Common, SweepRange, EXIT_ERROR, EXIT_NO_VALUE, EXIT_OK};

/// Signature of [`estimate_with`]; `verify` takes it as a parameter so a
/// faulty estimator can be substituted in tests.
pub type Estimator = dyn Fn(&RadialProblem, &QuadratureConfig, &EstimateOptions) -> morrey_embed::Result<EstimateReport> + Sync;

struct Settings {
    config: ProblemConfig,
    quad: QuadratureConfig,
    options: EstimateOptions,
    oracle: Option<OracleConfig>,
}

fn settings(c: &Common) -> Result<Settings, String> {
    let config = ProblemConfig::load(&c.config)?;
    let mut quad = QuadratureConfig::default();
    if let Some(tol) = c.rel_tol.or(config.rel_tol) {
        quad.rel_tol = tol;
    }
    quad.validate()?;
    let oracle = match c.oracle_budget.or(config.oracle_budget) {
        Some(b) if !(b > 0.0 && b.is_finite()) => return Err(format!("oracle budget must be positive, got {b}")),
        Some(b) => {
            let o = OracleConfig {
                seed: c.seed.or(config.seed).unwrap_or(0),
                ..OracleConfig::default().scaled_budget(b)
            };
            o.validate().map_err(|e| e.to_string())?;
            Some(o)
        }
        None => None,
    };
    let options = if c.force {
        EstimateOptions::forced()
    } else {
        EstimateOptions::default()
    };
    Ok(Settings {
        config,
        quad,
        options,
        oracle,
    })
}

fn describe(e: Error) -> String {
    match e {
        Error::HypothesisFailed(_) => format!("{e} (use --force to evaluate anyway)"),
        _ => e.to_string(),
    }
}

/// JSON form of an extended real: `inf` becomes the string `"inf"`.
fn real(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!("inf")
    }
}

fn opt_real(x: Option<f64>) -> Value {
    x.map_or(Value::Null, real)
}

fn text_real(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_infinite() => "inf".into(),
        Some(v) => v.to_string(),
        None => "none".into(),
    }
}

fn exit_for(report_value: Option<f64>) -> i32 {
    match report_value {
        Some(v) if v.is_finite() => EXIT_OK,
        _ => EXIT_NO_VALUE,
    }
}

pub fn estimate(c: &Common, out: &mut dyn Write) -> Result<i32, String> {
    let s = settings(c)?;
    let prob = s.config.problem()?;
    let report = estimate_with(&prob, &s.quad, &s.options).map_err(describe)?;
    let lower = match (&s.oracle, report.regime.is_estimated()) {
        (Some(o), true) => Some(maximize_ratio(&prob, o, &s.quad).map_err(describe)?.lower_bound),
        _ => None,
    };
    if c.json {
        let checks: Vec<Value> = report
            .hypothesis_checks
            .iter()
            .map(|h| json!({ "subject": h.subject(), "verdict": h.verdict(), "summary": h.summary(), "detail": h }))
            .collect();
        let terms: serde_json::Map<String, Value> = report.terms.iter().map(|(k, v)| (k.clone(), real(*v))).collect();
        let doc = json!({
            "regime": report.regime,
            "value": opt_real(report.value),
            "terms": terms,
            "checks": checks,
            "hypotheses_verified": report.hypotheses_verified,
            "warnings": report.warnings,
            "explanation": report.explanation,
            "oracle": { "lower_bound": opt_real(lower), "budget": s.oracle },
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&doc).unwrap()).map_err(|e| e.to_string())?;
    } else {
        let mut w = |line: String| writeln!(out, "{line}").map_err(|e| e.to_string());
        w(format!("regime: {}", report.regime))?;
        w(format!("value: {}", text_real(report.value)))?;
        for (k, v) in &report.terms {
            w(format!("  {k}: {}", text_real(Some(*v))))?;
        }
        for h in &report.hypothesis_checks {
            w(format!("check: {}", h.summary()))?;
        }
        for warning in &report.warnings {
            w(format!("warning: {warning}"))?;
        }
        if let Some(x) = &report.explanation {
            w(format!("note: {x}"))?;
        }
        if let Some(l) = lower {
            w(format!("oracle lower bound: {l}"))?;
        }
    }
    Ok(exit_for(report.value))
}

/// Outcome of `verify`.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub regime: RegimeTag,
    pub estimate: Option<f64>,
    pub oracle_lower: Option<f64>,
    /// `oracle_lower / estimate`.
    pub ratio: Option<f64>,
    pub slack: f64,
    /// `None` when the regime has no value to compare against.
    pub passed: Option<bool>,
    pub explanation: Option<String>,
}

/// Runs `estimator` and the oracle on `prob`; the check fails when the
/// oracle lower bound exceeds `slack` times the estimate.
pub fn verify_with(
    prob: &RadialProblem,
    quad: &QuadratureConfig,
    options: &EstimateOptions,
    oracle: &OracleConfig,
    slack: f64,
    estimator: &Estimator,
) -> morrey_embed::Result<VerifyReport> {
    let report = estimator(prob, quad, options)?;
    let regime = regime_of(&prob.params);
    let bare = VerifyReport {
        regime,
        estimate: report.value,
        oracle_lower: None,
        ratio: None,
        slack,
        passed: None,
        explanation: report.explanation.clone(),
    };
    let value = match report.value {
        Some(v) if v.is_finite() && regime.is_estimated() => v,
        _ => return Ok(bare),
    };
    let lower = maximize_ratio(prob, oracle, quad)?.lower_bound;
    Ok(VerifyReport {
        oracle_lower: Some(lower),
        ratio: Some(lower / value),
        passed: Some(lower <= slack * value),
        ..bare
    })
}

pub fn verify(c: &Common, slack: f64, estimator: &Estimator, out: &mut dyn Write) -> Result<i32, String> {
    if !(slack > 0.0) {
        return Err(format!("slack must be positive, got {slack}"));
    }
    let s = settings(c)?;
    let oracle = s.oracle.unwrap_or(OracleConfig {
        seed: c.seed.or(s.config.seed).unwrap_or(0),
        ..OracleConfig::default()
    });
    let prob = s.config.problem()?;
    let r = verify_with(&prob, &s.quad, &s.options, &oracle, slack, estimator).map_err(describe)?;
    let status = match r.passed {
        Some(true) => "PASS",
        Some(false) => "FAIL",
        None => "NO_VALUE",
    };
    if c.json {
        let doc = json!({
            "regime": r.regime,
            "estimate": opt_real(r.estimate),
            "oracle_lower": opt_real(r.oracle_lower),
            "ratio": opt_real(r.ratio),
            "slack": r.slack,
            "status": status,
            "explanation": r.explanation,
            "oracle": { "lower_bound": opt_real(r.oracle_lower), "budget": oracle },
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&doc).unwrap()).map_err(|e| e.to_string())?;
    } else {
        let mut w = |line: String| writeln!(out, "{line}").map_err(|e| e.to_string());
        w(format!("regime: {}", r.regime))?;
        w(format!("estimate: {}", text_real(r.estimate)))?;
        w(format!("oracle lower bound: {}", text_real(r.oracle_lower)))?;
        w(format!("ratio: {}", text_real(r.ratio)))?;
        if let Some(x) = &r.explanation {
            w(format!("note: {x}"))?;
        }
        w(format!("{status} (slack {})", r.slack))?;
    }
    Ok(match r.passed {
        Some(true) => EXIT_OK,
        Some(false) => EXIT_ERROR,
        None => EXIT_NO_VALUE,
    })
}

pub fn classify(c: &Common, out: &mut dyn Write) -> Result<i32, String> {
    let config = ProblemConfig::load(&c.config)?;
    let tag = regime_of(&config.params()?);
    let line = if c.json {
        json!({ "regime": tag, "family": tag.family(), "estimated": tag.is_estimated() }).to_string()
    } else {
        tag.to_string()
    };
    writeln!(out, "{line}").map_err(|e| e.to_string())?;
    Ok(EXIT_OK)
}

#[derive(Debug, Default)]
struct Row {
    value: f64,
    regime: String,
    estimate: String,
    lower: String,
    error: String,
}

fn cell(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        x.to_string()
    }
}

fn at_point(base: &RadialProblem, axis: Axis, x: f64) -> Result<RadialProblem, String> {
    let (p1, p2, th1, th2) = base.params.values();
    let n = base.params.n;
    let with = |p: (f64, f64, f64, f64)| {
        ParamQuadruple::new(p.0, p.1, p.2, p.3, n)
            .map(|q| base.with_params(q))
            .map_err(|e| e.to_string())
    };
    if !matches!(axis, Axis::P1 | Axis::P2 | Axis::Th1 | Axis::Th2) && !(x > 0.0 && x.is_finite()) {
        return Err(format!("scale factor must be positive, got {x}"));
    }
    match axis {
        Axis::P1 => with((x, p2, th1, th2)),
        Axis::P2 => with((p1, x, th1, th2)),
        Axis::Th1 => with((p1, p2, x, th2)),
        Axis::Th2 => with((p1, p2, th1, x)),
        Axis::Omega1 => Ok(base.with_omega1_scaled(x)),
        Axis::Omega2 => Ok(base.with_omega2_scaled(x)),
        Axis::V1 => Ok(RadialProblem {
            v1: base.v1.scaled(x),
            ..base.clone()
        }),
        Axis::V2 => Ok(base.with_v2_scaled(x)),
    }
}

fn sweep_row(base: &RadialProblem, axis: Axis, x: f64, s: &Settings) -> Row {
    let mut row = Row {
        value: x,
        ..Row::default()
    };
    let prob = match at_point(base, axis, x) {
        Ok(p) => p,
        Err(e) => {
            row.error = e;
            return row;
        }
    };
    row.regime = regime_of(&prob.params).to_string();
    match estimate_with(&prob, &s.quad, &s.options) {
        Ok(r) => {
            row.estimate = r.value.map(cell).unwrap_or_default();
            if let (Some(o), true) = (&s.oracle, r.regime.is_estimated()) {
                match maximize_ratio(&prob, o, &s.quad) {
                    Ok(l) => row.lower = cell(l.lower_bound),
                    Err(e) => row.error = e.to_string(),
                }
            }
        }
        Err(e) => row.error = describe(e),
    }
    row
}

pub fn sweep(c: &Common, range: &SweepRange, out: &mut dyn Write) -> Result<i32, String> {
    if !(range.from.is_finite() && range.to.is_finite()) {
        return Err("sweep bounds must be finite".into());
    }
    let s = settings(c)?;
    let base = s.config.problem()?;
    let points: Vec<f64> = if range.steps == 0 {
        vec![range.from]
    } else {
        (0..=range.steps)
            .map(|i| range.from + (range.to - range.from) * i as f64 / range.steps as f64)
            .collect()
    };
    let rows: Vec<Row> = points.par_iter().map(|&x| sweep_row(&base, range.axis, x, &s)).collect();
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| e.to_string();
    w.write_record(["axis", "value", "regime", "estimate", "oracle_lower_bound", "error"])
        .map_err(io)?;
    for r in rows {
        w.write_record([range.axis.name(), &r.value.to_string(), &r.regime, &r.estimate, &r.lower, &r.error])
            .map_err(io)?;
    }
    w.flush().map_err(|e| e.to_string())?;
    Ok(EXIT_OK)
}
