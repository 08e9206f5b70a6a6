//! Uniform result record for every verified condition.

use serde::Serialize;
use serde_json::Value;
use std::collections::BTreeMap;

/// How a constant was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactSpectral,
    RayleighAscent,
    RandomSample,
    Enumeration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Estimate,
}

/// One named constant with the way it was computed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constant {
    pub name: String,
    pub value: f64,
    pub method: Method,
    pub provenance: String,
}

/// A plot-ready point `(x, y)` in a named series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub series: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub condition: String,
    pub params: BTreeMap<String, Value>,
    pub constants: Vec<Constant>,
    pub witness: Option<String>,
    pub method: Method,
    pub verdict: Verdict,
    pub flags: Vec<String>,
    pub rows: Vec<Row>,
}

impl InequalityReport {
    pub fn new(condition: &str, method: Method) -> Self {
        InequalityReport {
            condition: condition.to_string(),
            params: BTreeMap::new(),
            constants: Vec::new(),
            witness: None,
            method,
            verdict: Verdict::Estimate,
            flags: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn push_constant(&mut self, name: &str, value: f64, method: Method, provenance: &str) {
        self.constants.push(Constant { name: name.to_string(), value, method, provenance: provenance.to_string() });
    }

    pub fn push_row(&mut self, series: &str, x: f64, y: f64) {
        self.rows.push(Row { series: series.to_string(), x, y });
    }

    pub fn flag(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        if !self.flags.contains(&msg) {
            self.flags.push(msg);
        }
    }

    /// Value of the first constant called `name`.
    pub fn constant(&self, name: &str) -> Option<f64> {
        self.constants.iter().find(|c| c.name == name).map(|c| c.value)
    }
}
