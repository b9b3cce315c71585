//! Report envelope, verdicts and CSV tables.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Shortest round-trip text of a float, as in the JSON reports.
pub fn fmt(x: f64) -> String {
    if x.is_finite() {
        serde_json::Number::from_f64(x).map_or_else(|| x.to_string(), |n| n.to_string())
    } else {
        x.to_string()
    }
}

/// One named claim with its numerical verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub tag: &'static str,
    pub verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "fail"
    }
}

impl Check {
    pub fn new(tag: &'static str, pass: bool) -> Self {
        Self {
            tag,
            verdict: verdict(pass),
            value: None,
            threshold: None,
        }
    }

    /// Passes when `value <= threshold` (NaN fails).
    pub fn bounded(tag: &'static str, value: f64, threshold: f64) -> Self {
        Self {
            tag,
            verdict: verdict(value <= threshold),
            value: Some(value),
            threshold: Some(threshold),
        }
    }

    pub fn with_value(mut self, v: f64) -> Self {
        self.value = Some(v);
        self
    }

    pub fn pass(&self) -> bool {
        self.verdict == "pass"
    }
}

/// Plot-ready table with a fixed header.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: vec![],
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(vec![]);
        let io = |e: csv::Error| CliError::Io(std::io::Error::other(e));
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.into_inner().map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Value,
    pub table: Option<Table>,
    pub pass: bool,
}

impl Outcome {
    /// Wraps a command body in the common envelope. Keys of `body` are merged
    /// into the top level.
    pub fn new(command: &str, cfg: &RunConfig, body: Value, checks: Vec<Check>) -> Self {
        let pass = checks.iter().all(Check::pass);
        let mut report = json!({
            "schema": format!("pekar/{command}/1"),
            "version": VERSION,
            "command": command,
            "config": cfg,
            "checks": checks,
            "verdict": verdict(pass),
        });
        if let Value::Object(extra) = body {
            report.as_object_mut().expect("envelope is an object").extend(extra);
        }
        Self {
            report,
            table: None,
            pass,
        }
    }

    pub fn with_table(mut self, t: Table) -> Self {
        self.table = Some(t);
        self
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

pub fn to_json_bytes(v: &Value) -> Result<Vec<u8>, CliError> {
    let mut b = serde_json::to_vec_pretty(v).map_err(|e| CliError::Io(e.into()))?;
    b.push(b'\n');
    Ok(b)
}

/// Report for a failed run, carrying the machine-readable code.
pub fn error_report(command: &str, err: &CliError) -> Value {
    json!({
        "schema": "pekar/error/1",
        "version": VERSION,
        "command": command,
        "error": err.code(),
        "message": err.to_string(),
    })
}

/// Writes the JSON to `out` (and the table beside it as `.csv`), or the JSON
/// to stdout when no path is given.
pub fn emit(report: &Value, table: Option<&Table>, out: Option<&Path>) -> Result<(), CliError> {
    let bytes = to_json_bytes(report)?;
    match out {
        Some(p) => {
            std::fs::write(p, &bytes)?;
            if let Some(t) = table {
                std::fs::write(p.with_extension("csv"), t.to_bytes()?)?;
            }
        }
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}
