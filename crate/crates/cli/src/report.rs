use finob_core::chain::ChainError;
use finob_core::doc::{self, DocError};
use finob_core::k0::K0Error;
use finob_core::ranicki::RanickiError;
use finob_core::report::{VerifyReport, Violation};
use serde_json::{json, Map, Value};

use crate::Format;

/// A command that could not run: malformed input, a missing object or an
/// unsupported operation. Exit status 1.
#[derive(Debug)]
pub struct Failure {
    pub code: &'static str,
    pub message: String,
}

impl Failure {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }

    pub fn render(&self) -> String {
        doc::to_text(&json!({ "status": "error", "code": self.code, "message": self.message }))
    }
}

impl From<DocError> for Failure {
    fn from(e: DocError) -> Self {
        Failure::new(e.code(), e.to_string())
    }
}

impl From<ChainError> for Failure {
    fn from(e: ChainError) -> Self {
        let code = match e {
            ChainError::Unsupported { .. }
            | ChainError::Linalg(finob_core::linalg::LinalgError::UnsupportedRing { .. }) => "unsupported_ring",
            _ => "invalid_object",
        };
        Failure::new(code, e.to_string())
    }
}

impl From<K0Error> for Failure {
    fn from(e: K0Error) -> Self {
        match e {
            K0Error::Chain(c) => c.into(),
            K0Error::Unsupported { .. } => Failure::new("unsupported_ring", e.to_string()),
            _ => Failure::new("no_witness", e.to_string()),
        }
    }
}

impl From<RanickiError> for Failure {
    fn from(e: RanickiError) -> Self {
        match e {
            RanickiError::Chain(c) => c.into(),
            RanickiError::K0(k) => k.into(),
            RanickiError::Unsupported(_) => Failure::new("unsupported", e.to_string()),
            RanickiError::Internal(_) => Failure::new("internal_identity", e.to_string()),
            _ => Failure::new("invalid_object", e.to_string()),
        }
    }
}

/// Outcome of a command that ran. Violations give exit status 2.
pub struct Report {
    pub command: &'static str,
    pub name: Option<String>,
    pub violations: VerifyReport,
    /// Ordered `label: value` lines for the text format.
    pub lines: Vec<(String, String)>,
    /// The `result` object of the structured format.
    pub result: Map<String, Value>,
}

fn violation_value(v: &Violation) -> Value {
    json!({
        "code": v.code,
        "degree": v.degree,
        "entry": v.entry.map(|(r, c)| json!([r, c])),
        "detail": v.detail,
    })
}

impl Report {
    pub fn new(command: &'static str, name: Option<&str>) -> Self {
        Report {
            command,
            name: name.map(str::to_string),
            violations: VerifyReport::new(),
            lines: Vec::new(),
            result: Map::new(),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.violations.is_ok()
    }

    pub fn line(&mut self, label: &str, value: impl ToString) {
        self.lines.push((label.to_string(), value.to_string()));
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.result.insert(key.to_string(), value);
    }

    fn status(&self) -> &'static str {
        if self.is_ok() {
            "ok"
        } else {
            "violation"
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => {
                let mut out = format!("command: {}\n", self.command);
                if let Some(n) = &self.name {
                    out.push_str(&format!("name: {n}\n"));
                }
                for (k, v) in &self.lines {
                    out.push_str(&format!("{k}: {v}\n"));
                }
                out.push_str(&format!("status: {}\n", self.status()));
                for v in &self.violations.violations {
                    out.push_str(&format!("violation: {v}\n"));
                }
                out
            }
            Format::Structured => {
                let mut result = Map::new();
                let mut keys: Vec<&String> = self.result.keys().collect();
                keys.sort();
                for k in keys {
                    result.insert(k.clone(), self.result[k].clone());
                }
                let v = json!({
                    "command": self.command,
                    "name": self.name,
                    "status": self.status(),
                    "violations": self.violations.violations.iter().map(violation_value).collect::<Vec<_>>(),
                    "result": Value::Object(result),
                });
                doc::to_text(&v)
            }
        }
    }
}
