//! Records and their json, csv and text renderings.

use std::io::Write;
use std::path::Path;
use std::time::Duration;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use vinocount::engine::{CountResult, Subject};
use vinocount::exponents::{ScanResult, TsetsReport};
use vinocount::{Method, Quantity, RhsVector, ShiftPolynomialFamily};

use crate::Failure;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// One count. `value` is a decimal string so that no width is lost.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub s: u32,
    pub k: u32,
    #[serde(rename = "X", default, skip_serializing_if = "Option::is_none")]
    pub x: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_set: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_set: Option<String>,
    pub a: Vec<i64>,
    pub quantity: Quantity,
    pub value: String,
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
}

fn millis(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

impl CountRecord {
    pub fn from_result(r: &CountResult, timing: bool) -> Self {
        let (x, x_set, h_set) = match &r.subject {
            Subject::Box(shape) => (Some(shape.x), None, None),
            Subject::Sets { x_set, h_set, .. } => {
                (None, Some(x_set.to_string()), h_set.as_ref().map(|h| h.to_string()))
            }
        };
        CountRecord {
            s: r.subject.s(),
            k: r.subject.k(),
            x,
            x_set,
            h_set,
            a: r.a.as_slice().to_vec(),
            quantity: r.quantity,
            value: r.value.to_string(),
            method: r.method,
            elapsed_ms: timing.then(|| millis(r.elapsed)),
            bound: None,
            ratio: None,
        }
    }

    pub fn phi(s: u32, k: u32, x: u64, n: &RhsVector, value: f64, elapsed: Option<Duration>) -> Self {
        CountRecord {
            s,
            k,
            x: Some(x),
            x_set: None,
            h_set: None,
            a: n.as_slice().to_vec(),
            quantity: Quantity::Phi,
            value: value.to_string(),
            method: Method::Convolution,
            elapsed_ms: elapsed.map(millis),
            bound: None,
            ratio: None,
        }
    }

    /// The bound is stated for the unshifted count.
    pub fn with_bound(&mut self, report: TsetsReport) {
        self.bound = Some(report.bound);
        self.ratio = Some(report.ratio);
    }

    fn text(&self) -> String {
        let a = self.a.iter().map(i64::to_string).collect::<Vec<_>>().join(",");
        let domain = match (&self.x, &self.x_set, &self.h_set) {
            (Some(x), _, _) => x.to_string(),
            (None, Some(xs), Some(hs)) => format!("{xs}, {hs}"),
            (None, Some(xs), None) => xs.clone(),
            _ => String::new(),
        };
        let mut line = format!("{}_{{{},{}}}({domain}; {a}) = {}", self.quantity, self.s, self.k, self.value);
        if let (Some(b), Some(r)) = (self.bound, self.ratio) {
            line.push_str(&format!("  bound {b} ratio {r}"));
        }
        line
    }
}

/// Shift family as exact coefficient rows, lowest degree first.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolyRecord {
    pub k: u32,
    pub a: Vec<i64>,
    pub rows: Vec<Vec<i128>>,
    pub degrees: Vec<u32>,
    pub display: Vec<String>,
}

impl PolyRecord {
    pub fn new(family: &ShiftPolynomialFamily) -> Self {
        PolyRecord {
            k: family.k(),
            a: family.rhs().as_slice().to_vec(),
            rows: family.rows().to_vec(),
            degrees: family.realized_degrees(),
            display: family.display_rows(),
        }
    }
}

fn csv_field(v: &Value) -> String {
    let raw = match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    };
    if raw.contains([',', '"', '\n']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

/// Buffers output so nothing partial is written on refusal.
pub struct Emitter {
    format: Format,
    buf: String,
}

impl Emitter {
    pub fn new(format: Format) -> Self {
        Emitter { format, buf: String::new() }
    }

    fn json<T: Serialize>(&mut self, value: &T) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Config(e.to_string()))?;
        self.buf.push_str(&text);
        self.buf.push('\n');
        Ok(())
    }

    /// JSON as is; flat objects become one csv row or `key: value` lines.
    pub fn json_or_text<T: Serialize>(&mut self, value: &T) -> Result<(), Failure> {
        if self.format == Format::Json {
            return self.json(value);
        }
        let v = serde_json::to_value(value).map_err(|e| Failure::Config(e.to_string()))?;
        let Value::Object(map) = v else {
            self.buf.push_str(&plain(&v));
            self.buf.push('\n');
            return Ok(());
        };
        match self.format {
            Format::Csv => {
                let keys: Vec<&str> = map.keys().map(String::as_str).collect();
                let row: Vec<String> = map.values().map(csv_field).collect();
                self.buf.push_str(&format!("{}\n{}\n", keys.join(","), row.join(",")));
            }
            _ => {
                for (key, val) in &map {
                    self.buf.push_str(&format!("{key}: {}\n", plain(val)));
                }
            }
        }
        Ok(())
    }

    pub fn count(&mut self, record: &CountRecord) -> Result<(), Failure> {
        match self.format {
            Format::Json => self.json(record),
            Format::Csv => self.json_or_text(record),
            Format::Text => {
                self.buf.push_str(&record.text());
                self.buf.push('\n');
                Ok(())
            }
        }
    }

    pub fn poly(&mut self, record: &PolyRecord) -> Result<(), Failure> {
        match self.format {
            Format::Json => self.json(record),
            Format::Csv => {
                self.buf.push_str("j,degree,coefficient\n");
                for (j, row) in record.rows.iter().enumerate() {
                    for (e, c) in row.iter().enumerate() {
                        self.buf.push_str(&format!("{},{e},{c}\n", j + 1));
                    }
                }
                Ok(())
            }
            Format::Text => {
                for line in &record.display {
                    self.buf.push_str(line);
                    self.buf.push('\n');
                }
                Ok(())
            }
        }
    }

    pub fn scan(&mut self, result: &ScanResult) -> Result<(), Failure> {
        match self.format {
            Format::Json => self.json(result),
            Format::Csv => {
                self.buf.push_str(&result.to_csv());
                Ok(())
            }
            Format::Text => {
                self.buf.push_str(&format!("J_{{{},{}}}(X; {})\n", result.s, result.k, result.a));
                for p in &result.points {
                    self.buf.push_str(&format!("{:>8}  {}\n", p.x, p.count));
                }
                if let Some(x) = result.truncated_at {
                    self.buf.push_str(&format!("truncated at X = {x} by the budget\n"));
                }
                Ok(())
            }
        }
    }

    pub fn finish(&mut self, path: Option<&Path>) -> Result<(), String> {
        let text = std::mem::take(&mut self.buf);
        match path {
            Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(text.as_bytes()).map_err(|e| e.to_string())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_lists() {
        assert_eq!(csv_field(&serde_json::json!([1, 3])), "\"[1,3]\"");
        assert_eq!(csv_field(&serde_json::json!("7")), "7");
    }

    #[test]
    fn record_round_trips() {
        let r = CountRecord {
            s: 1,
            k: 2,
            x: Some(5),
            x_set: None,
            h_set: None,
            a: vec![1, 3],
            quantity: Quantity::J,
            value: "1".into(),
            method: Method::Convolution,
            elapsed_ms: None,
            bound: None,
            ratio: None,
        };
        let text = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<CountRecord>(&text).unwrap(), r);
        assert!(!text.contains("elapsed_ms"));
    }
}
