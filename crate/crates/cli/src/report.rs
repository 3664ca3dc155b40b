//! JSON reports and the error document.

use serde::Serialize;
use serde_json::Value;

/// One asserted tolerance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    /// `"<"` for an upper bound, `"in"` for a closed interval.
    pub relation: &'static str,
    pub limit: Vec<f64>,
    pub pass: bool,
}

impl Check {
    pub fn below(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            relation: "<",
            limit: vec![limit],
            pass: measured < limit,
        }
    }

    pub fn within(name: impl Into<String>, measured: f64, lo: f64, hi: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            relation: "in",
            limit: vec![lo, hi],
            pass: (lo..=hi).contains(&measured),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub pass: bool,
    pub checks: Vec<Check>,
    /// Files written, relative to the output directory.
    pub artifacts: Vec<String>,
    pub details: Value,
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Self {
            command,
            pass: true,
            checks: Vec::new(),
            artifacts: Vec::new(),
            details: Value::Object(Default::default()),
        }
    }

    pub fn check(&mut self, c: Check) {
        self.pass &= c.pass;
        self.checks.push(c);
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        if let Value::Object(m) = &mut self.details {
            m.insert(key.to_string(), v);
        }
    }

    pub fn failed(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Machine-readable failure document.
#[derive(Clone, Debug, Serialize)]
pub struct ErrorDoc {
    pub error: ErrorBody,
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorBody {
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failed_checks: Vec<String>,
}

impl ErrorDoc {
    pub fn new(kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            error: ErrorBody {
                kind,
                message: message.into(),
                command: None,
                failed_checks: Vec::new(),
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("error serializes")
    }
}
