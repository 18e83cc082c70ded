use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Map, Value};
use tmod_core::{CinfNum, Prec};

/// A verdict together with the residual that decided it. `residual: null`
/// means the compared quantity is exactly zero.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: Prec,
    pub threshold: i64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub argv: Vec<String>,
    pub config: Value,
    pub outputs: Map<String, Value>,
    pub checks: Vec<Check>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub timings: BTreeMap<String, f64>,
    #[serde(skip)]
    pub table: Vec<(String, String)>,
    #[serde(skip)]
    started: Option<Instant>,
}

pub fn fmt_residual(r: Prec) -> String {
    r.map_or("exact".to_string(), |v| v.to_string())
}

/// Text and exact JSON form of a value.
pub fn num(x: &CinfNum) -> Value {
    json!({ "text": x.render(), "value": x.to_json() })
}

pub fn nums(xs: &[CinfNum]) -> Value {
    Value::Array(xs.iter().map(num).collect())
}

impl Report {
    pub fn new(command: &str, config: Value) -> Self {
        Report {
            command: command.to_string(),
            argv: std::env::args().skip(1).collect(),
            config,
            outputs: Map::new(),
            checks: Vec::new(),
            pass: true,
            error: None,
            timings: BTreeMap::new(),
            table: Vec::new(),
            started: Some(Instant::now()),
        }
    }

    pub fn output(&mut self, key: &str, v: Value) {
        self.outputs.insert(key.to_string(), v);
    }

    /// A row of the human-readable table.
    pub fn row(&mut self, key: impl Into<String>, v: impl Into<String>) {
        self.table.push((key.into(), v.into()));
    }

    pub fn check(&mut self, name: impl Into<String>, residual: Prec, threshold: i64, pass: bool) -> &mut Check {
        self.checks.push(Check { name: name.into(), residual, threshold, pass, note: None });
        self.checks.last_mut().unwrap()
    }

    pub fn timed<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        *self.timings.entry(stage.to_string()).or_default() += start.elapsed().as_secs_f64();
        out
    }

    pub fn fail(&mut self, err: impl std::fmt::Display) {
        self.error = Some(err.to_string());
    }

    pub fn finish(&mut self) {
        if let Some(start) = self.started.take() {
            self.timings.insert("total".into(), start.elapsed().as_secs_f64());
        }
        self.pass = self.error.is_none() && self.checks.iter().all(|c| c.pass);
    }

    pub fn render(&self) -> String {
        let mut s = format!("tmod {}\n", self.command);
        let width = self.table.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in &self.table {
            s.push_str(&format!("  {k:<width$}  {v}\n"));
        }
        for c in &self.checks {
            s.push_str(&format!(
                "{} {} (residual {}, threshold {})",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                fmt_residual(c.residual),
                c.threshold
            ));
            if let Some(n) = &c.note {
                s.push_str(&format!(" [{n}]"));
            }
            s.push('\n');
        }
        if let Some(e) = &self.error {
            s.push_str(&format!("error: {e}\n"));
        }
        s.push_str(&format!(
            "{} in {:.2}s\n",
            if self.pass { "all checks passed" } else { "verification FAILED" },
            self.timings.get("total").copied().unwrap_or(0.0)
        ));
        s
    }
}
