use serde::Serialize;
use serde_json::{json, Value};

use crate::diagram::DiagramError;
use crate::dsl::ProgramError;
use crate::smatrix::SMatrixError;
use crate::tensor::EvalError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub values: Value,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, values: Value) -> Self {
        Self {
            name: name.into(),
            passed,
            values,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: Vec<String>,
    pub checks: Vec<Check>,
    pub atol: f64,
    pub seed: Option<u64>,
}

impl Report {
    pub fn new(command: Vec<String>, atol: f64) -> Self {
        Self {
            command,
            checks: Vec::new(),
            atol,
            seed: None,
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }

    pub(crate) fn program(e: ProgramError) -> Self {
        Self::new("program", e.to_string())
    }

    pub(crate) fn diagram(e: DiagramError) -> Self {
        Self::new("diagram", e.to_string())
    }

    pub(crate) fn eval(e: EvalError) -> Self {
        Self::new("eval", e.to_string())
    }

    pub(crate) fn smatrix(e: SMatrixError) -> Self {
        Self::new("smatrix", e.to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&json!({
            "error": { "kind": self.kind, "message": self.message }
        }))
        .expect("error serializes")
    }
}
