//! The structured run report. Serialization is deterministic: records keep
//! execution order, details are keyed by `BTreeMap`, and wall-clock times
//! appear only when asked for.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

pub const FORMAT: &str = "deformctl-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Residual(f64),
    Verdict(bool),
    Count(i64),
}

#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub suite: String,
    pub name: String,
    pub anchor: String,
    pub outcome: Outcome,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Environment {
    pub seed: u64,
    pub precision: &'static str,
    pub theta_grid: Vec<f64>,
    pub k1_rank: usize,
    pub tool_version: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub format: &'static str,
    pub scenario: String,
    pub environment: Environment,
    pub records: Vec<Record>,
    pub details: BTreeMap<String, Value>,
    pub passed: bool,
}

impl Report {
    pub fn new(scenario: impl Into<String>, seed: u64, theta_grid: Vec<f64>) -> Self {
        Self {
            format: FORMAT,
            scenario: scenario.into(),
            environment: Environment {
                seed,
                precision: "binary64",
                theta_grid,
                k1_rank: deform_core::k0::K1_RANK,
                tool_version: env!("CARGO_PKG_VERSION"),
            },
            records: Vec::new(),
            details: BTreeMap::new(),
            passed: true,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report values serialize") + "\n"
    }

    pub fn failures(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| !r.pass)
    }

    /// One line per record.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let value = match r.outcome {
                Outcome::Residual(x) => format!("residual {x:.3e} (tol {:.0e})", r.tolerance),
                Outcome::Verdict(b) => format!("verdict {b}"),
                Outcome::Count(n) => format!("value {n}"),
            };
            let status = if r.pass { "PASS" } else { "FAIL" };
            out.push_str(&format!("{status}  {:<8} {:<40} {value}\n", r.suite, r.name));
        }
        let failed = self.failures().count();
        out.push_str(&format!(
            "{}: {} records, {} failed\n",
            self.scenario,
            self.records.len(),
            failed
        ));
        out
    }
}

/// Collects records for one suite, applying tolerance overrides.
pub struct Recorder<'a> {
    report: &'a mut Report,
    suite: &'static str,
    overrides: &'a BTreeMap<String, f64>,
    timings: bool,
    only: Option<&'a [String]>,
    started: Instant,
}

impl<'a> Recorder<'a> {
    pub fn new(report: &'a mut Report, suite: &'static str, overrides: &'a BTreeMap<String, f64>, timings: bool) -> Self {
        Self {
            report,
            suite,
            overrides,
            timings,
            only: None,
            started: Instant::now(),
        }
    }

    /// Keep only records whose names are listed.
    pub fn with_filter(mut self, only: Option<&'a [String]>) -> Self {
        self.only = only;
        self
    }

    fn wanted(&self, name: &str) -> bool {
        self.only.is_none_or(|o| o.iter().any(|x| x == name))
    }

    fn push(&mut self, name: &str, anchor: &str, outcome: Outcome, tolerance: f64, pass: bool) {
        if !self.wanted(name) {
            return;
        }
        let runtime_ms = self.timings.then(|| self.started.elapsed().as_secs_f64() * 1e3);
        self.started = Instant::now();
        self.report.passed &= pass;
        self.report.records.push(Record {
            suite: self.suite.to_string(),
            name: name.to_string(),
            anchor: anchor.to_string(),
            outcome,
            tolerance,
            pass,
            runtime_ms,
        });
    }

    /// Passes when `residual <= tolerance`; NaN never passes.
    pub fn residual(&mut self, name: &str, anchor: &str, residual: f64, tolerance: f64) -> bool {
        let tol = self.overrides.get(name).copied().unwrap_or(tolerance);
        let pass = residual <= tol;
        self.push(name, anchor, Outcome::Residual(residual), tol, pass);
        pass
    }

    pub fn verdict(&mut self, name: &str, anchor: &str, verdict: bool, pass: bool) -> bool {
        self.push(name, anchor, Outcome::Verdict(verdict), 0.0, pass);
        pass
    }

    pub fn count(&mut self, name: &str, anchor: &str, value: i64, pass: bool) -> bool {
        self.push(name, anchor, Outcome::Count(value), 0.0, pass);
        pass
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.report.details.insert(format!("{}.{key}", self.suite), v);
    }

    /// A check that could not run. Recorded as a failing verdict with the
    /// reason kept in the details.
    pub fn error(&mut self, name: &str, anchor: &str, message: impl std::fmt::Display) {
        if !self.wanted(name) {
            return;
        }
        let key = format!("{}.{name}.error", self.suite);
        self.report.details.insert(key, Value::String(message.to_string()));
        self.verdict(name, anchor, false, false);
    }
}
