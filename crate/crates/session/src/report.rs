//! Report records and their JSON and text renderings.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use crate::error::SessionError;
use crate::exec::RunConfig;

/// Bumped whenever the JSON layout changes.
pub const REPORT_VERSION: u32 = 1;
pub const TOOL_NAME: &str = "indiga";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    /// A check ran and did not hold.
    Failed,
    /// The statement raised an error.
    Error,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Ok => "ok",
            Outcome::Failed => "failed",
            Outcome::Error => "error",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub index: usize,
    pub line: usize,
    pub source: String,
    pub kind: String,
    pub name: Option<String>,
    pub outcome: Outcome,
    pub summary: String,
    pub data: Map<String, Value>,
    pub error: Option<(String, String)>,
    pub elapsed_ms: Option<u64>,
}

impl Record {
    pub fn error(
        index: usize,
        line: usize,
        source: String,
        kind: &str,
        name: Option<String>,
        e: &SessionError,
    ) -> Self {
        let mut data = Map::new();
        if let SessionError::Parse { col, .. } | SessionError::Name { col, .. } = e {
            data.insert("column".into(), json!(col));
        }
        Record {
            index,
            line,
            source,
            kind: kind.to_string(),
            name,
            outcome: Outcome::Error,
            summary: e.to_string(),
            data,
            error: Some((e.kind().to_string(), e.to_string())),
            elapsed_ms: None,
        }
    }

    pub fn failed(&self) -> bool {
        self.outcome != Outcome::Ok
    }

    pub fn to_json(&self) -> Value {
        let mut m = self.data.clone();
        m.insert("index".into(), json!(self.index));
        m.insert("line".into(), json!(self.line));
        m.insert("source".into(), json!(self.source));
        m.insert("command".into(), json!(self.kind));
        m.insert("outcome".into(), json!(self.outcome.as_str()));
        m.insert("summary".into(), json!(self.summary));
        if let Some(n) = &self.name {
            m.insert("name".into(), json!(n));
        }
        if let Some((kind, message)) = &self.error {
            m.insert("error".into(), json!({"kind": kind, "message": message}));
        }
        if let Some(ms) = self.elapsed_ms {
            m.insert("elapsed_ms".into(), json!(ms));
        }
        Value::Object(m)
    }
}

/// Outcome records of one script, in statement order.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub name: String,
    pub config: RunConfig,
    pub records: Vec<Record>,
}

fn config_json(c: &RunConfig) -> Value {
    json!({
        "depth": c.depth,
        "power": c.power,
        "deg": c.deg,
        "groebner_cap": c.groebner_cap,
        "seed": c.seed,
        "fail_fast": c.fail_fast,
        "timings": c.timings,
    })
}

fn tool_json() -> Value {
    json!({"name": TOOL_NAME, "version": TOOL_VERSION})
}

impl Report {
    pub fn failed(&self) -> usize {
        self.records.iter().filter(|r| r.failed()).count()
    }

    fn body(&self) -> Value {
        json!({
            "script": self.name,
            "records": self.records.iter().map(Record::to_json).collect::<Vec<_>>(),
            "summary": {"records": self.records.len(), "failed": self.failed()},
        })
    }

    pub fn to_json(&self) -> Value {
        let mut m = match self.body() {
            Value::Object(m) => m,
            _ => unreachable!("report body is an object"),
        };
        m.insert("report_version".into(), json!(REPORT_VERSION));
        m.insert("tool".into(), tool_json());
        m.insert("config".into(), config_json(&self.config));
        Value::Object(m)
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("json values serialize");
        s.push('\n');
        s
    }

    fn write_records(&self, out: &mut String) {
        let width = self.records.iter().map(|r| r.source.chars().count()).max().unwrap_or(0).min(60);
        for r in &self.records {
            let _ = writeln!(
                out,
                "{:>4}  {:<6}  {:<width$}  {}",
                r.line,
                r.outcome.as_str(),
                r.source,
                r.summary,
            );
        }
        let _ = writeln!(out, "{} records, {} failed", self.records.len(), self.failed());
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{TOOL_NAME} {TOOL_VERSION}  report v{REPORT_VERSION}  {}", config_text(&self.config));
        let _ = writeln!(out, "script {}", self.name);
        self.write_records(&mut out);
        out
    }
}

fn config_text(c: &RunConfig) -> String {
    format!(
        "depth={} power={} deg={} groebner_cap={} seed={}",
        c.depth, c.power, c.deg, c.groebner_cap, c.seed
    )
}

/// Several script reports run under one configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub config: RunConfig,
    pub reports: Vec<Report>,
}

impl SuiteReport {
    pub fn failed(&self) -> usize {
        self.reports.iter().map(Report::failed).sum()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "report_version": REPORT_VERSION,
            "tool": tool_json(),
            "config": config_json(&self.config),
            "sessions": self.reports.iter().map(Report::body).collect::<Vec<_>>(),
            "summary": {
                "sessions": self.reports.len(),
                "records": self.reports.iter().map(|r| r.records.len()).sum::<usize>(),
                "failed": self.failed(),
            },
        })
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("json values serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{TOOL_NAME} {TOOL_VERSION}  report v{REPORT_VERSION}  {}", config_text(&self.config));
        for r in &self.reports {
            let _ = writeln!(out, "\nscript {}", r.name);
            r.write_records(&mut out);
        }
        out
    }
}
