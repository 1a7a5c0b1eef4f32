//! Result envelopes, canonical JSON and CSV tables.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const ENVELOPE_SCHEMA: &str = "critshe-envelope/1";

/// Everything a run reports. `inputs` is the fully resolved configuration
/// and can be fed back through `--config`.
#[derive(Debug, Clone)]
pub struct Envelope {
    pub command: &'static str,
    pub inputs: Value,
    pub seeds: Value,
    pub results: Value,
    pub warnings: Vec<String>,
    pub timings: Option<Value>,
}

impl Envelope {
    pub fn new(command: &'static str, inputs: Value, seeds: Value, results: Value, warnings: Vec<String>) -> Self {
        Self {
            command,
            inputs,
            seeds,
            results,
            warnings,
            timings: None,
        }
    }

    pub fn to_value(&self) -> Value {
        let mut v = json!({
            "schema_version": ENVELOPE_SCHEMA,
            "command": self.command,
            "inputs": self.inputs,
            "config_hash": content_hash(&self.inputs),
            "seeds": self.seeds,
            "results": self.results,
            "warnings": self.warnings,
            "software": { "name": "critshe", "version": env!("CARGO_PKG_VERSION") },
        });
        if let Some(t) = &self.timings {
            v["timings"] = t.clone();
        }
        v
    }

    /// Pretty canonical JSON with a trailing newline.
    pub fn render(&self) -> String {
        let mut s = canonical_json(&self.to_value(), true);
        s.push('\n');
        s
    }
}

/// `{"value": v, "error": e}`.
pub(crate) fn measured(value: f64, error: f64) -> Value {
    json!({ "value": value, "error": error })
}

/// `{"value": v, "error": "exact"}`.
pub(crate) fn exact(value: f64) -> Value {
    json!({ "value": value, "error": "exact" })
}

/// Git-style object hash of the compact canonical form:
/// `sha256("blob <len>\0" + bytes)`.
pub fn content_hash(v: &Value) -> String {
    let body = canonical_json(v, false);
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", body.len()).as_bytes());
    h.update(body.as_bytes());
    let digest = h.finalize();
    let mut out = String::from("sha256:");
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// 17 significant digits in scientific notation; valid JSON and CSV.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// JSON with object keys sorted and floats at 17 significant digits.
pub fn canonical_json(v: &Value, pretty: bool) -> String {
    let mut out = String::new();
    write_value(v, pretty, 0, &mut out);
    out
}

fn write_value(v: &Value, pretty: bool, depth: usize, out: &mut String) {
    let newline = |out: &mut String, d: usize| {
        if pretty {
            out.push('\n');
            out.push_str(&"  ".repeat(d));
        }
    };
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_u64() || n.is_i64() {
                out.push_str(&n.to_string());
            } else {
                out.push_str(&format_float(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) => {
            if a.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                newline(out, depth + 1);
                write_value(x, pretty, depth + 1, out);
            }
            newline(out, depth);
            out.push(']');
        }
        Value::Object(m) => {
            if m.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                newline(out, depth + 1);
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push(':');
                if pretty {
                    out.push(' ');
                }
                write_value(&m[*k], pretty, depth + 1, out);
            }
            newline(out, depth);
            out.push('}');
        }
    }
}

/// A header and string rows, written as RFC 4180 CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Numerical(format!("csv encoding: {e}")))?;
        String::from_utf8(bytes).map_err(|e| CliError::Numerical(format!("csv encoding: {e}")))
    }
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}
