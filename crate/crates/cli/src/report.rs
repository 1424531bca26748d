use std::fmt::Write as _;
use std::path::PathBuf;

use hermitia::io::fmt_f64;
use serde_json::{Map, Value};

/// Exit codes.
pub const OK: i32 = 0;
pub const NEGATIVE: i32 = 1;
pub const UNKNOWN: i32 = 2;
pub const USAGE: i32 = 64;
pub const DATA: i32 = 65;

/// A verb's output: ordered fields, an optional file payload, the exit code.
pub struct Report {
    fields: Map<String, Value>,
    payload: Option<String>,
    pub code: i32,
}

impl Report {
    pub fn new(code: i32) -> Self {
        Self {
            fields: Map::new(),
            payload: None,
            code,
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.fields.insert(key.to_string(), value.into());
        self
    }

    pub fn num(&mut self, key: &str, x: f64) -> &mut Self {
        self.set(key, float(x))
    }

    pub fn payload(&mut self, text: String) -> &mut Self {
        self.payload = Some(text);
        self
    }

    /// Writes the payload to `out` if given, otherwise it goes with the report.
    pub fn emit(mut self, json: bool, out: Option<&PathBuf>) -> std::io::Result<i32> {
        if let (Some(path), Some(p)) = (out, self.payload.as_ref()) {
            std::fs::write(path, p)?;
            self.fields
                .insert("written".into(), Value::from(path.display().to_string()));
            self.payload = None;
        }
        if json {
            if let Some(p) = self.payload.take() {
                self.fields.insert("payload".into(), Value::from(p));
            }
            println!("{}", Value::Object(self.fields));
        } else {
            let mut s = String::new();
            for (k, v) in &self.fields {
                let _ = writeln!(s, "{k}: {}", text(v));
            }
            if let Some(p) = &self.payload {
                s.push_str(p);
            }
            print!("{s}");
        }
        Ok(self.code)
    }
}

pub fn float(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

fn text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if !n.is_i64() && !n.is_u64() => fmt_f64(x),
            _ => n.to_string(),
        },
        Value::Array(items) if items.iter().all(|i| !i.is_object() && !i.is_array()) => {
            items.iter().map(text).collect::<Vec<_>>().join(" ")
        }
        Value::Array(items) => {
            let lines: Vec<String> = items.iter().map(|i| format!("\n  {}", text(i))).collect();
            lines.concat()
        }
        Value::Object(m) => m
            .iter()
            .map(|(k, v)| format!("{k}={}", text(v)))
            .collect::<Vec<_>>()
            .join(" "),
        Value::Null => "none".into(),
        Value::Bool(b) => b.to_string(),
    }
}
