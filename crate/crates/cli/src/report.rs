use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

/// Direction in which a check's `worst` value is compared with its `limit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub dim: Option<usize>,
    pub passed: bool,
    /// What `worst` measures.
    pub metric: String,
    pub worst: f64,
    pub bound: Bound,
    pub limit: f64,
    /// Numerical tolerance used inside the check.
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    pub fn new(
        name: &str,
        dim: usize,
        metric: &str,
        worst: f64,
        bound: Bound,
        limit: f64,
        tolerance: f64,
    ) -> Self {
        let passed = match bound {
            Bound::AtMost => worst <= limit,
            Bound::AtLeast => worst >= limit,
        };
        Self {
            name: name.into(),
            dim: Some(dim),
            passed,
            metric: metric.into(),
            worst,
            bound,
            limit,
            tolerance,
            detail: String::new(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    /// Fails the check regardless of its value.
    pub fn and(mut self, ok: bool) -> Self {
        self.passed &= ok;
        self
    }

    /// A check that could not be evaluated.
    pub fn errored(name: &str, dim: usize, err: impl std::fmt::Display) -> Self {
        Self {
            name: name.into(),
            dim: Some(dim),
            passed: false,
            metric: "error".into(),
            worst: f64::NAN,
            bound: Bound::AtMost,
            limit: 0.0,
            tolerance: 0.0,
            detail: err.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub dims: Vec<usize>,
    pub seed: Option<u64>,
    pub passed: bool,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

impl Report {
    pub fn new(command: String, dims: Vec<usize>, seed: Option<u64>) -> Self {
        Self {
            tool: "werner",
            version: env!("CARGO_PKG_VERSION"),
            command,
            dims,
            seed,
            passed: true,
            checks: Vec::new(),
            result: None,
            wall_time_seconds: None,
        }
    }

    pub fn push(&mut self, check: Check) {
        self.passed &= check.passed;
        self.checks.push(check);
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Csv => self.to_csv(),
            Format::Text => self.to_text(),
        }
    }

    fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.result.is_none() {
            w.write_record([
                "name",
                "dim",
                "passed",
                "metric",
                "worst",
                "bound",
                "limit",
                "tolerance",
                "detail",
            ])
            .expect("in-memory write");
            for c in &self.checks {
                w.write_record([
                    c.name.clone(),
                    c.dim.map(|d| d.to_string()).unwrap_or_default(),
                    c.passed.to_string(),
                    c.metric.clone(),
                    format_float(c.worst),
                    bound_name(c.bound).into(),
                    format_float(c.limit),
                    format_float(c.tolerance),
                    c.detail.clone(),
                ])
                .expect("in-memory write");
            }
        } else {
            w.write_record(["key", "value"]).expect("in-memory write");
            for (k, v) in self.flattened() {
                w.write_record([k, v]).expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    fn to_text(&self) -> String {
        let mut out = String::new();
        let status = if self.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "werner {} :: {}", self.version, self.command);
        let _ = writeln!(out, "overall: {status}");
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{} {:<32} d={} {}={} ({} {}) {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.dim.map(|d| d.to_string()).unwrap_or_else(|| "-".into()),
                c.metric,
                short_float(c.worst),
                bound_name(c.bound),
                short_float(c.limit),
                c.detail
            );
        }
        if self.result.is_some() {
            for (k, v) in self.flattened() {
                let _ = writeln!(out, "{k}: {v}");
            }
        }
        if let Some(t) = self.wall_time_seconds {
            let _ = writeln!(out, "wall time: {t:.3} s");
        }
        out
    }

    fn flattened(&self) -> Vec<(String, String)> {
        let mut rows = Vec::new();
        if let Some(v) = &self.result {
            flatten("", v, &mut rows);
        }
        rows
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&key(k), v, out)),
        Value::Array(items) if items.iter().all(|x| !x.is_object() && !x.is_array()) => {
            let joined: Vec<String> = items.iter().map(scalar).collect();
            out.push((prefix.to_string(), format!("[{}]", joined.join(", "))));
        }
        Value::Array(items) => items
            .iter()
            .enumerate()
            .for_each(|(i, v)| flatten(&key(&i.to_string()), v, out)),
        _ => out.push((prefix.to_string(), scalar(v))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n
            .as_f64()
            .filter(|_| n.is_f64())
            .map(format_float)
            .unwrap_or_else(|| n.to_string()),
        other => other.to_string(),
    }
}

fn bound_name(b: Bound) -> &'static str {
    match b {
        Bound::AtMost => "<=",
        Bound::AtLeast => ">=",
    }
}

fn short_float(x: f64) -> String {
    if x == 0.0 || x.fract() == 0.0 && x.abs() < 1e6 {
        format!("{x}")
    } else {
        format!("{x:.3e}")
    }
}

pub fn format_float(x: f64) -> String {
    if x == 0.0 || (1e-3..1e6).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Text => "txt",
        }
    }
}
