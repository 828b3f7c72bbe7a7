use std::path::Path;
use std::time::Instant;

use anyhow::Context;
use crl_core::scalar::to_decimal;
use crl_core::Rational;
use serde::Serialize;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Input {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Value {
    pub name: String,
    /// Exact value as `p/q` (or an integer).
    pub exact: String,
    pub decimal: String,
}

impl Value {
    pub fn new(name: impl Into<String>, q: &Rational) -> Self {
        Self {
            name: name.into(),
            exact: q.to_string(),
            decimal: to_decimal(q, 12),
        }
    }
}

/// Machine-readable record of one command. Everything but `elapsed_ms` is
/// a function of the inputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Vec<Input>,
    pub outputs: Vec<Value>,
    pub notes: Vec<String>,
    pub verdict: Option<String>,
    pub certificates: Vec<String>,
    pub elapsed_ms: u128,
    #[serde(skip)]
    started: Option<Instant>,
}

impl RunReport {
    pub fn start(command: &str) -> Self {
        Self {
            command: command.to_string(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            notes: Vec::new(),
            verdict: None,
            certificates: Vec::new(),
            elapsed_ms: 0,
            started: Some(Instant::now()),
        }
    }

    pub fn input(&mut self, role: &str, path: &Path, sha256: String) {
        self.inputs.push(Input {
            role: role.to_string(),
            path: path.display().to_string(),
            sha256,
        });
    }

    /// Record and print a value, exact first.
    pub fn value(&mut self, name: &str, q: &Rational) {
        let v = Value::new(name, q);
        println!("{name} = {} ({})", v.exact, v.decimal);
        self.outputs.push(v);
    }

    pub fn note(&mut self, line: impl Into<String>) {
        let line = line.into();
        println!("{line}");
        self.notes.push(line);
    }

    pub fn finish(mut self, path: Option<&Path>) -> anyhow::Result<()> {
        if let Some(t) = self.started.take() {
            self.elapsed_ms = t.elapsed().as_millis();
        }
        if let Some(path) = path {
            let json = serde_json::to_string_pretty(&self)?;
            std::fs::write(path, json + "\n")
                .with_context(|| format!("writing report {}", path.display()))?;
        }
        Ok(())
    }
}
