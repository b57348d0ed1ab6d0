//! JSON report documents emitted by every command.

use std::collections::BTreeMap;

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Parameters {
    pub d: usize,
    pub n: usize,
    pub delta: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub parameters: Parameters,
    pub metrics: BTreeMap<String, serde_json::Value>,
    /// Per-check verdicts; the command exits 1 unless all are true.
    pub pass: BTreeMap<String, bool>,
}

impl Report {
    pub fn new(command: &str, parameters: Parameters) -> Report {
        Report {
            command: command.to_string(),
            parameters,
            metrics: BTreeMap::new(),
            pass: BTreeMap::new(),
        }
    }

    pub fn metric(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("serializable metric");
        self.metrics.insert(key.to_string(), v);
    }

    pub fn check(&mut self, key: &str, ok: bool) {
        self.pass.insert(key.to_string(), ok);
    }

    pub fn all_pass(&self) -> bool {
        self.pass.values().all(|&v| v)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
