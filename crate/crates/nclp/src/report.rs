//! Suite reports as JSON (schema version 1) and CSV summaries.

use serde::Serialize;
use serde_json::{Map, Value};

use nclp_core::suite::{Check, Relation, SuiteReport, Witness};

use crate::formats::{AmplifiedJson, ElementJson, MapJson};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct CheckJson {
    pub instance: String,
    pub check: String,
    pub measured: f64,
    pub bound: f64,
    pub relation: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportJson {
    pub schema_version: u32,
    pub suite: String,
    pub seed: u64,
    pub params: Map<String, Value>,
    pub passed: bool,
    pub checks: Vec<CheckJson>,
    pub data: Map<String, Value>,
    pub notes: Vec<String>,
    pub timestamp: String,
}

fn witness_json(w: &Witness) -> Value {
    let tagged = |kind: &str, value: Value| {
        let mut m = Map::new();
        m.insert("kind".into(), kind.into());
        m.insert("value".into(), value);
        Value::Object(m)
    };
    let to = |v: serde_json::Result<Value>| v.unwrap_or(Value::Null);
    match w {
        Witness::Element(e) => tagged("element", to(serde_json::to_value(ElementJson::from_element(e)))),
        Witness::Amplified(a) => tagged("amplified", to(serde_json::to_value(AmplifiedJson::from_amplified(a)))),
        Witness::Map(m) => tagged("map", to(serde_json::to_value(MapJson::from_map(m)))),
        Witness::Pair(a, b) => tagged(
            "pair",
            Value::Array(vec![
                to(serde_json::to_value(ElementJson::from_element(a))),
                to(serde_json::to_value(ElementJson::from_element(b))),
            ]),
        ),
        Witness::Text(t) => tagged("text", t.clone().into()),
    }
}

fn check_json(c: &Check) -> CheckJson {
    CheckJson {
        instance: c.instance.clone(),
        check: c.check.clone(),
        measured: c.measured,
        bound: c.bound,
        relation: c.relation.symbol(),
        tolerance: match c.relation {
            Relation::Within(t) => Some(t),
            _ => None,
        },
        status: if c.passed { "pass" } else { "fail" },
        witness: c.witness.as_ref().map(witness_json),
    }
}

/// Parameter values that parse as numbers are stored as numbers.
fn param_value(v: &str) -> Value {
    if let Ok(i) = v.parse::<u64>() {
        return i.into();
    }
    match v.parse::<f64>() {
        Ok(f) if f.is_finite() => f.into(),
        _ => v.into(),
    }
}

pub fn to_json(r: &SuiteReport, timestamp: &str) -> ReportJson {
    ReportJson {
        schema_version: SCHEMA_VERSION,
        suite: r.suite.clone(),
        seed: r.seed,
        params: r.params.iter().map(|(k, v)| (k.clone(), param_value(v))).collect(),
        passed: r.passed(),
        checks: r.checks.iter().map(check_json).collect(),
        data: r.data.iter().map(|(k, v)| (k.clone(), v.clone().into())).collect(),
        notes: r.notes.clone(),
        timestamp: timestamp.into(),
    }
}

pub fn to_json_string(r: &SuiteReport, timestamp: &str) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(&to_json(r, timestamp))?)
}

/// One row per check: `suite,instance,check,measured,bound,status`.
pub fn to_csv(reports: &[SuiteReport]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["suite", "instance", "check", "measured", "bound", "status"])?;
    for r in reports {
        for c in &r.checks {
            w.write_record([
                r.suite.as_str(),
                c.instance.as_str(),
                c.check.as_str(),
                &c.measured.to_string(),
                &c.bound.to_string(),
                if c.passed { "pass" } else { "fail" },
            ])?;
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nclp_core::suite::{run_example, ExampleParams};

    #[test]
    fn example_report_carries_betas_and_params() {
        let r = run_example(&ExampleParams { restarts: 0, ..ExampleParams::new(2.0, 0.5, 2, 1) }).unwrap();
        let j = to_json(&r, "t");
        assert_eq!(j.schema_version, 1);
        assert_eq!(j.params["p"], 2.0);
        assert_eq!(j.params["n_max"], 2);
        let beta = j.data["beta"].as_array().unwrap()[0].as_f64().unwrap();
        assert!((beta - 1.25 / 3.0).abs() < 1e-15);
        let csv = to_csv(&[r]).unwrap();
        assert!(csv.starts_with("suite,instance,check,measured,bound,status\n"));
        assert!(csv.lines().skip(1).all(|l| l.starts_with("example,")));
    }
}
