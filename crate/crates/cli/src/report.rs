use ethics2vec::EthicsVector2D;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EthicsVectorReport {
    Binary(EthicsVector2D),
    Aggregate { risk_names: Vec<String>, components: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightRatios {
    pub ratio_of_sums: f64,
    pub sum_of_ratios: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub name: String,
    pub value: f64,
}

impl Diagnostic {
    pub fn new(name: &str, value: f64) -> Self {
        Self { name: name.to_string(), value }
    }
}

/// Result of auditing one agent, binary or continuous.
///
/// `recovered_ratio` is `l_fp / l_fn` for a binary agent and `w_1 / w_2`
/// (ratio of sums) for a control law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub agent_id: String,
    pub method: String,
    pub recovered_ratio: f64,
    pub ethics_vector: EthicsVectorReport,
    pub weight_ratio: Option<WeightRatios>,
    pub diagnostics: Vec<Diagnostic>,
    pub config_echo: serde_json::Value,
    pub seed: u64,
}

impl AuditReport {
    pub fn diagnostic(&self, name: &str) -> Option<f64> {
        self.diagnostics.iter().find(|d| d.name == name).map(|d| d.value)
    }
}
