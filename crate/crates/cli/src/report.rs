//! Run reports: a stable envelope around each command's result rows,
//! printable as text or machine-readable JSON.

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use std::time::Instant;

/// Envelope for one command invocation. `config` echoes the effective
/// parameters (seeds and sample indices included) and `config_digest`
/// fingerprints them; `duration_ms` is the only field that varies between
/// identical runs.
pub struct Report {
    command: &'static str,
    config: Value,
    rows: Vec<Value>,
    started: Instant,
}

impl Report {
    pub fn new(command: &'static str, config: Value) -> Self {
        Self {
            command,
            config,
            rows: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn push_row(&mut self, row: Value) {
        self.rows.push(row);
    }

    fn digest(&self) -> String {
        let canonical = serde_json::to_string(&self.config).expect("config serializes");
        let hash = Sha256::digest(canonical.as_bytes());
        hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        map.insert("command".into(), Value::String(self.command.into()));
        map.insert("config".into(), self.config.clone());
        map.insert("config_digest".into(), Value::String(self.digest()));
        map.insert("rows".into(), Value::Array(self.rows.clone()));
        map.insert(
            "duration_ms".into(),
            Value::from(self.started.elapsed().as_secs_f64() * 1e3),
        );
        Value::Object(map)
    }

    /// Prints the report: JSON when asked, otherwise a human-readable block.
    pub fn emit(&self, json: bool) {
        if json {
            println!("{}", serde_json::to_string_pretty(&self.to_json()).unwrap());
            return;
        }
        println!("command        {}", self.command);
        println!("config digest  {}", self.digest());
        for row in &self.rows {
            println!();
            if let Value::Object(fields) = row {
                for (key, value) in fields {
                    println!("  {:<22} {}", key, render(value));
                }
            }
        }
        println!();
        println!(
            "done in {:.1} ms",
            self.started.elapsed().as_secs_f64() * 1e3
        );
    }
}

fn render(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

/// Formats an optional float for a CSV cell; absent values become empty.
pub fn csv_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
