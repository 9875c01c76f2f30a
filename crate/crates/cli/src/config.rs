//! Hierarchical TOML configuration.
//!
//! ```toml
//! [audit]              # audit-binary and experiment-binary
//! method = "parametric"          # or "nonparametric"
//! slope_form = "exact"           # or "density-ratio"
//! max_violation_fraction = 0.001
//! # bandwidth = 0.25             # default: 0.25 * score std
//!
//! [binary]             # experiment-binary
//! ratios = [0.1, ...]
//! n_per_agent = 100000
//! seed = 20240901
//! [binary.fit]
//! mu0 = 0.0
//! sigma0 = 1.0
//! mu1 = 1.0
//! sigma1 = 1.0
//! [binary.priors]
//! p_n = 0.5
//! p_p = 0.5
//!
//! [car]                # experiment-car and simulate-car
//! destination = 250.0
//! horizon = 4.0
//! dt = 0.01
//! ...
//! ```
//!
//! Every section and key is optional; `print-config` shows the full set of
//! defaults.

use std::path::Path;

use ethics2vec::sim::{BinaryExperimentConfig, CarExperimentConfig};
use ethics2vec::AuditConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub audit: AuditConfig,
    pub binary: BinaryExperimentConfig,
    pub car: CarExperimentConfig,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::parse(&text).map_err(|message| CliError::Config { path: path.to_path_buf(), message })
    }

    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let config: Config = toml::from_str(text).map_err(|e| e.to_string())?;
        config.validate().map_err(|e| e.to_string())?;
        Ok(config)
    }

    pub fn validate(&self) -> ethics2vec::Result<()> {
        let a = &self.audit;
        if !(0.0..1.0).contains(&a.max_violation_fraction) {
            return Err(ethics2vec::Error::InvalidConfig(
                "audit.max_violation_fraction must lie in [0, 1)".into(),
            ));
        }
        if let Some(bw) = a.bandwidth {
            if !(bw.is_finite() && bw > 0.0) {
                return Err(ethics2vec::Error::InvalidBandwidth(bw));
            }
        }
        self.binary.validate()?;
        self.car.validate()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config is always representable as TOML")
    }
}
