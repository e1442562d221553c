use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One computed quantity, as emitted on stdout and stored in the cache.
///
/// Exact rationals travel as `"p/q"` strings; JSON numbers cannot hold them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema: u32,
    pub quantity: String,
    pub params: BTreeMap<String, Value>,
    pub value: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    /// Secondary outputs (diagnostics, exact forms, tables).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
    pub meta: Meta,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bits: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engine: Option<String>,
    pub version: String,
    pub cached: bool,
    /// Unix seconds at computation time.
    pub timestamp: u64,
}

impl ResultRecord {
    pub fn new(quantity: &str, value: impl Into<Value>) -> Self {
        ResultRecord {
            schema: SCHEMA_VERSION,
            quantity: quantity.to_string(),
            params: BTreeMap::new(),
            value: value.into(),
            stderr: None,
            detail: None,
            meta: Meta {
                version: TOOL_VERSION.to_string(),
                timestamp: now(),
                ..Meta::default()
            },
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn stderr(mut self, se: f64) -> Self {
        self.stderr = Some(se);
        self
    }

    pub fn detail(mut self, detail: Value) -> Self {
        self.detail = Some(detail);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.meta.seed = Some(seed);
        self
    }

    pub fn trials(mut self, trials: u64) -> Self {
        self.meta.trials = Some(trials);
        self
    }

    pub fn bits(mut self, bits: u32) -> Self {
        self.meta.bits = Some(bits);
        self
    }

    pub fn engine(mut self, engine: &str) -> Self {
        self.meta.engine = Some(engine.to_string());
        self
    }
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn json_round_trip() {
        let rec = ResultRecord::new("prob-complete", "5/6")
            .param("m", 2)
            .param("n", 2)
            .engine("hk")
            .detail(json!({"count": "5"}));
        let text = serde_json::to_string(&rec).unwrap();
        let back: ResultRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(back, rec);
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["value"], "5/6");
        assert_eq!(v["meta"]["cached"], false);
        assert!(v.get("stderr").is_none());

        let rec = ResultRecord::new("mc-l1", 2.75).stderr(0.01).seed(7).trials(100);
        let back: ResultRecord = serde_json::from_str(&serde_json::to_string_pretty(&rec).unwrap()).unwrap();
        assert_eq!(back, rec);
    }
}
