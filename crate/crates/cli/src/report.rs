use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "pass")]
    Pass,
    #[serde(rename = "fail")]
    Fail,
    #[serde(rename = "n/a")]
    NotApplicable,
}

/// The JSON document every command prints on stdout.
#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub verdict: Verdict,
    pub metrics: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rng: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            verdict: Verdict::NotApplicable,
            metrics: BTreeMap::new(),
            seed: None,
            rng: None,
            output: None,
            error: None,
        }
    }

    pub fn metric(&mut self, name: &str, value: impl Serialize) -> &mut Self {
        let v = serde_json::to_value(value).expect("metrics serialize");
        self.metrics.insert(name.to_string(), v);
        self
    }

    pub fn seeded(&mut self, seed: u64) -> &mut Self {
        self.seed = Some(seed);
        self.rng = Some(qalg::random::RNG_ALGORITHM);
        self
    }

    pub fn verdict(&mut self, ok: bool) -> &mut Self {
        self.verdict = if ok { Verdict::Pass } else { Verdict::Fail };
        self
    }
}
